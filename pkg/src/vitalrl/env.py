"""Isolated multi-agent monitoring environment.

One sub-environment per vital. Sub-environments share the time axis of a
subject's recording and nothing else: each agent sees only its own vital,
its actions affect only its own reward, and the recorded stream advances
regardless of what any agent does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .data import SubjectStream, normalize_array
from .errors import ConfigurationError, DomainError, EpisodeCompleteError
from .mews import VitalKind, classify
from .rewards import DEFAULT_REWARDS, RewardMatrix


@dataclass(frozen=True)
class EpisodeConfig:
    monitor_length: int
    episodes: int = 10
    gamma: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if int(self.monitor_length) < 0:
            raise ConfigurationError("monitor_length must be >= 0")
        if int(self.episodes) < 1:
            raise ConfigurationError("episodes must be >= 1")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigurationError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Observation:
    time_index: int
    vital: VitalKind
    raw_value: float
    norm_value: float
    features: tuple[float, ...]


@dataclass(frozen=True)
class Transition:
    state: Observation
    action: int
    reward: int
    next_state: Observation
    done: bool


class VitalEnv:
    """Single-vital sub-environment with a reset/step cursor."""

    def __init__(self, vital, values, monitor_length: int, *, window: int = 1,
                 rewards: RewardMatrix = DEFAULT_REWARDS):
        self.vital = VitalKind.parse(vital)
        if self.vital.is_categorical:
            raise ConfigurationError("no monitoring agent is defined for sedation scores")
        raw = np.asarray(values, dtype=float)
        if raw.ndim != 1:
            raise ConfigurationError(f"{self.vital.value}: stream must be one-dimensional")
        if not np.all(np.isfinite(raw)):
            raise ConfigurationError(f"{self.vital.value}: stream contains non-finite values")
        if raw.shape[0] < monitor_length + 1:
            raise ConfigurationError(
                f"{self.vital.value}: stream has {raw.shape[0]} samples, "
                f"needs monitor_length + 1 = {monitor_length + 1}"
            )
        if window < 1:
            raise ConfigurationError("window must be >= 1")
        self.monitor_length = int(monitor_length)
        self.window = int(window)
        self.rewards = rewards
        self._raw = raw
        self._norm = normalize_array(self.vital, raw)
        self._scores = np.array([classify(self.vital, v) for v in raw], dtype=np.int64)
        self._t = 0
        self._score = 0
        self._steps = 0

    @property
    def time_index(self) -> int:
        return self._t

    @property
    def done(self) -> bool:
        return self._t >= self.monitor_length

    def mews_at(self, t: int) -> int:
        return int(self._scores[t])

    def observation(self, t: int) -> Observation:
        lo = t - self.window + 1
        if lo >= 0:
            feats = self._norm[lo:t + 1]
        else:
            feats = np.concatenate([np.full(-lo, self._norm[0]), self._norm[:t + 1]])
        return Observation(t, self.vital, float(self._raw[t]), float(self._norm[t]),
                           tuple(float(f) for f in feats))

    def reset(self) -> Observation:
        self._t = 0
        self._score = 0
        self._steps = 0
        return self.observation(0)

    def step(self, action: int) -> tuple[Observation, int, bool]:
        if self.done:
            raise EpisodeCompleteError(
                f"{self.vital.value}: episode finished after {self.monitor_length} steps; call reset()"
            )
        r = self.rewards.reward(self.mews_at(self._t), action)
        self._t += 1
        self._steps += 1
        self._score += r
        return self.observation(self._t), r, self._t == self.monitor_length

    def episode_score(self) -> int:
        return self._score


class MonitoringEnv:
    """Container of isolated per-vital sub-environments."""

    def __init__(self, subs: Mapping[VitalKind, VitalEnv]):
        self.subs = dict(subs)

    @property
    def agents(self) -> list[VitalKind]:
        return list(self.subs)

    def __getitem__(self, agent) -> VitalEnv:
        agent = VitalKind.parse(agent)
        try:
            return self.subs[agent]
        except KeyError:
            raise ConfigurationError(f"no sub-environment for {agent.value}") from None

    def __len__(self):
        return len(self.subs)

    def reset(self, agent) -> Observation:
        return self[agent].reset()

    def step(self, agent, action: int):
        return self[agent].step(action)

    def episode_score(self, agent) -> int:
        return self[agent].episode_score()


def make_env(streams, config: EpisodeConfig, *, vitals: Sequence | None = None,
             window: int = 1, rewards: RewardMatrix = DEFAULT_REWARDS) -> MonitoringEnv:
    """Build one sub-environment per vital.

    ``streams`` is a ``SubjectStream`` or a mapping of vital to series. All
    selected series must share one length of at least ``monitor_length + 1``.
    """
    if isinstance(streams, SubjectStream):
        series = streams.values
    else:
        series = {VitalKind.parse(k): v for k, v in streams.items()}
    chosen = [VitalKind.parse(v) for v in vitals] if vitals is not None else list(series)
    if not chosen:
        raise ConfigurationError("at least one vital stream is required")
    missing = [v.value for v in chosen if v not in series]
    if missing:
        raise ConfigurationError(f"missing streams for: {', '.join(missing)}")
    lengths = {len(series[v]) for v in chosen}
    if len(lengths) > 1:
        raise ConfigurationError(f"stream lengths differ: {sorted(lengths)}")
    return MonitoringEnv({
        v: VitalEnv(v, series[v], config.monitor_length, window=window, rewards=rewards)
        for v in chosen
    })


def discounted_return(rewards, gamma: float) -> float:
    if not 0.0 <= gamma < 1.0 or math.isnan(gamma):
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    total, weight = 0.0, 1.0
    for r in rewards:
        total += weight * float(r)
        weight *= gamma
    return total
