"""Learning agents: the DQN monitor and the tabular Q-learning baseline."""
from __future__ import annotations

from collections import deque
from dataclasses import asdict, dataclass

import numpy as np

from .env import Transition, VitalEnv
from .errors import DomainError
from .mews import MET_LEVELS, VitalKind
from .neural import QNetwork, td_targets

N_ACTIONS = MET_LEVELS


def epsilon_greedy(q_values, epsilon: float, rng: np.random.Generator) -> int:
    """Random action with probability ``epsilon``, else the lowest-index argmax."""
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(N_ACTIONS))
    return int(np.argmax(q_values))


class ReplayMemory:
    """Bounded FIFO store of transitions."""

    def __init__(self, capacity: int = 2000):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.buffer: deque[Transition] = deque(maxlen=self.capacity)

    def append(self, transition: Transition) -> None:
        self.buffer.append(transition)

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        return rng.choice(len(self.buffer), size=batch_size, replace=False)

    def __len__(self):
        return len(self.buffer)

    def __getitem__(self, i) -> Transition:
        return self.buffer[i]

    def __iter__(self):
        return iter(self.buffer)


@dataclass
class ExplorationSchedule:
    epsilon: float = 1.0
    epsilon_decay: float = 0.995
    epsilon_min: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not 0.0 < self.epsilon_decay <= 1.0:
            raise DomainError(f"epsilon_decay must lie in (0, 1], got {self.epsilon_decay}")
        if not 0.0 <= self.epsilon_min <= 1.0:
            raise DomainError(f"epsilon_min must lie in [0, 1], got {self.epsilon_min}")

    def decay(self) -> float:
        self.epsilon = max(self.epsilon_min, self.epsilon * self.epsilon_decay)
        return self.epsilon


class DQNAgent:
    """One vital, one network, one replay memory.

    ``explore_rng`` drives epsilon-greedy draws and ``replay_rng`` drives
    minibatch sampling, so the two never perturb each other.
    """

    def __init__(self, net: QNetwork, *, gamma: float = 0.95, batch_size: int = 32,
                 schedule: ExplorationSchedule | None = None, memory_capacity: int = 2000,
                 explore_rng: np.random.Generator | None = None,
                 replay_rng: np.random.Generator | None = None):
        if not 0.0 <= gamma < 1.0:
            raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
        if batch_size < 1:
            raise DomainError("batch_size must be >= 1")
        self.net = net
        self.gamma = float(gamma)
        self.batch_size = int(batch_size)
        self.schedule = schedule if schedule is not None else ExplorationSchedule()
        self.memory = ReplayMemory(memory_capacity)
        self.explore_rng = explore_rng if explore_rng is not None else np.random.default_rng(1)
        self.replay_rng = replay_rng if replay_rng is not None else np.random.default_rng(2)

    @property
    def vital(self) -> VitalKind | None:
        return self.net.vital

    @property
    def epsilon(self) -> float:
        return self.schedule.epsilon

    def act(self, state, epsilon: float | None = None) -> int:
        eps = self.schedule.epsilon if epsilon is None else epsilon
        return epsilon_greedy(self.net.forward(_features(state)), eps, self.explore_rng)

    def remember(self, transition: Transition) -> None:
        self.memory.append(transition)

    def replay(self, batch_size: int | None = None) -> float | None:
        """Train on a uniform minibatch; a no-op until memory holds a full batch."""
        n = self.batch_size if batch_size is None else int(batch_size)
        if len(self.memory) < n:
            return None
        idx = self.memory.sample_indices(n, self.replay_rng)
        batch = [self.memory[i] for i in idx]
        states = np.array([t.state.features for t in batch])
        next_states = np.array([t.next_state.features for t in batch])
        actions = np.array([t.action for t in batch], dtype=np.int64)
        rewards = np.array([t.reward for t in batch], dtype=float)
        done = np.array([t.done for t in batch])
        targets = td_targets(rewards, self.gamma, self.net.forward(next_states), done)
        loss = self.net.train_arrays(states, actions, targets)
        self.schedule.decay()
        return loss

    def to_document(self) -> dict:
        doc = self.net.to_document()
        doc["exploration"] = asdict(self.schedule)
        return doc


def _features(state):
    if hasattr(state, "features"):
        return np.asarray(state.features, dtype=float)
    return np.atleast_1d(np.asarray(state, dtype=float))


def act(agent: DQNAgent, state, epsilon: float) -> int:
    return agent.act(state, epsilon)


def remember(agent: DQNAgent, transition: Transition) -> ReplayMemory:
    agent.remember(transition)
    return agent.memory


def replay(agent: DQNAgent, batch_size: int):
    loss = agent.replay(batch_size)
    return loss, agent.net, agent.epsilon


# ----------------------------------------------------------------- tabular

class QTable:
    """5x5 action-value table indexed by MEWS score and action."""

    def __init__(self, alpha: float = 0.1, gamma: float = 0.9, q=None):
        if not 0.0 <= alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
        if not 0.0 <= gamma < 1.0:
            raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
        self.alpha = float(alpha)
        self.gamma = float(gamma)
        self.q = np.zeros((MET_LEVELS, N_ACTIONS)) if q is None else np.array(q, dtype=float)
        if self.q.shape != (MET_LEVELS, N_ACTIONS):
            raise DomainError("Q-table must be 5x5")

    def update(self, s: int, a: int, r: float, s_next: int) -> "QTable":
        target = r + self.gamma * self.q[s_next].max()
        self.q[s, a] = (1.0 - self.alpha) * self.q[s, a] + self.alpha * target
        return self

    def greedy_policy(self) -> dict[int, int]:
        return {s: int(np.argmax(self.q[s])) for s in range(MET_LEVELS)}


def q_update(table: QTable, s: int, a: int, r: float, s_next: int) -> QTable:
    return table.update(s, a, r, s_next)


def greedy_policy(table: QTable) -> dict[int, int]:
    return table.greedy_policy()


def run_tabular_episode(table: QTable, env: VitalEnv, epsilon: float,
                        rng: np.random.Generator, learn: bool = True) -> int:
    """One episode of Q-learning on MEWS-score states; returns the episode score."""
    env.reset()
    s = env.mews_at(0)
    done = env.monitor_length == 0
    while not done:
        a = epsilon_greedy(table.q[s], epsilon, rng)
        _, r, done = env.step(a)
        s_next = env.mews_at(env.time_index)
        if learn:
            table.update(s, a, r, s_next)
        s = s_next
    return env.episode_score()
