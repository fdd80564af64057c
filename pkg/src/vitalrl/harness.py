"""Multi-episode, multi-agent training runs and hyperparameter sweeps."""
from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .agents import DQNAgent, ExplorationSchedule
from .data import SubjectStream
from .env import EpisodeConfig, Transition, VitalEnv, make_env
from .errors import ConfigurationError, NumericalFailureError, SweepError, TrainingAborted
from .mews import VitalKind
from .neural import QNetwork
from .rewards import DEFAULT_REWARDS, RewardMatrix
from .seeding import rng_for

PER_EPISODE = "per_episode"
PER_STEP = "per_step"

METRICS_HEADER = ("episode", "agent", "subject", "score")
SWEEP_HEADER = ("param", "value", "episode", "agent", "score")


@dataclass(frozen=True)
class RunConfig:
    monitor_length: int = 500
    episodes: int = 10
    gamma: float = 0.95
    seed: int = 0
    alpha: float = 1e-2
    batch_size: int = 32
    hidden: int = 24
    epsilon: float = 1.0
    # decay applies per replay call; with per-step replay this keeps some
    # exploration alive through the first ten episodes
    epsilon_decay: float = 0.9995
    epsilon_min: float = 0.01
    vitals: tuple[VitalKind, ...] = (VitalKind.HEART_RATE,)
    replay_cadence: str = PER_STEP
    memory_capacity: int = 2000
    window: int = 1
    rewards: RewardMatrix = field(default=DEFAULT_REWARDS, compare=False)

    def __post_init__(self):
        vitals = tuple(VitalKind.parse(v) for v in self.vitals)
        object.__setattr__(self, "vitals", vitals)
        if not vitals:
            raise ConfigurationError("at least one vital is required")
        if len(set(vitals)) != len(vitals):
            raise ConfigurationError("vitals must be distinct")
        if not self.alpha > 0:
            raise ConfigurationError(f"alpha must be > 0, got {self.alpha}")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.hidden < 1:
            raise ConfigurationError("hidden must be >= 1")
        if self.replay_cadence not in (PER_EPISODE, PER_STEP):
            raise ConfigurationError(f"unknown replay cadence {self.replay_cadence!r}")
        if self.memory_capacity < self.batch_size:
            raise ConfigurationError("memory_capacity must be >= batch_size")
        # validates the remaining ranges
        self.episode_config()
        self.schedule()

    def episode_config(self) -> EpisodeConfig:
        return EpisodeConfig(self.monitor_length, self.episodes, self.gamma, self.seed)

    def schedule(self) -> ExplorationSchedule:
        return ExplorationSchedule(self.epsilon, self.epsilon_decay, self.epsilon_min)

    def snapshot(self) -> dict:
        d = asdict(self)
        d["vitals"] = [v.value for v in self.vitals]
        d["rewards"] = self.rewards.to_layout()
        return d


@dataclass(frozen=True)
class MetricRow:
    episode: int
    agent: str
    subject: str
    score: int


@dataclass
class RunMetrics:
    rows: list[MetricRow]
    seed: int
    config: dict
    wall_time: float = field(default=0.0, compare=False)
    models: dict = field(default_factory=dict, compare=False, repr=False)

    def scores(self, agent, subject: str | None = None) -> list[int]:
        """Episode-ordered scores of one agent (first subject if unspecified)."""
        agent = VitalKind.parse(agent).value
        rows = [r for r in self.rows if r.agent == agent]
        if subject is None and rows:
            subject = rows[0].subject
        return [r.score for r in sorted(rows, key=lambda r: r.episode) if r.subject == subject]

    def sorted_rows(self) -> list[MetricRow]:
        return sorted(self.rows, key=lambda r: (r.subject, r.agent, r.episode))

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(METRICS_HEADER)
            for r in self.sorted_rows():
                w.writerow([r.episode, r.agent, r.subject, r.score])
        return path


def read_metrics_csv(path) -> list[MetricRow]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != METRICS_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [MetricRow(int(r["episode"]), r["agent"], r["subject"], int(r["score"]))
                for r in reader]


def make_agent(vital: VitalKind, subject: str, config: RunConfig) -> DQNAgent:
    seed = config.seed
    net = QNetwork(config.window, config.hidden, learning_rate=config.alpha,
                   rng=rng_for(seed, "init", subject, vital.value), vital=vital)
    net.seed = seed
    net.config = {k: v for k, v in config.snapshot().items() if k != "rewards"}
    return DQNAgent(
        net,
        gamma=config.gamma,
        batch_size=config.batch_size,
        schedule=config.schedule(),
        memory_capacity=config.memory_capacity,
        explore_rng=rng_for(seed, "explore", subject, vital.value),
        replay_rng=rng_for(seed, "replay", subject, vital.value),
    )


def _as_stream_list(streams) -> list[SubjectStream]:
    if isinstance(streams, SubjectStream):
        return [streams]
    streams = list(streams)
    if not streams:
        raise ConfigurationError("no subject streams supplied")
    ids = [s.subject_id for s in streams]
    if len(set(ids)) != len(ids):
        raise ConfigurationError(f"duplicate subject ids: {ids}")
    return streams


def run_training(streams, config: RunConfig, out_dir=None,
                 on_episode: Callable[[MetricRow], None] | None = None) -> RunMetrics:
    """Train fresh agents per subject and record every episode score.

    Subjects are processed one after another. Within a subject, all agents
    step in lockstep over the shared time axis but never exchange state.
    """
    t0 = time.perf_counter()
    rows: list[MetricRow] = []
    models: dict[tuple[str, str], DQNAgent] = {}
    n = config.monitor_length
    per_step = config.replay_cadence == PER_STEP

    for stream in _as_stream_list(streams):
        env = make_env(stream, config.episode_config(), vitals=config.vitals,
                       window=config.window, rewards=config.rewards)
        agents = {v: make_agent(v, stream.subject_id, config) for v in config.vitals}
        for episode in range(1, config.episodes + 1):
            try:
                obs = {v: env.reset(v) for v in agents}
                for _ in range(n):
                    for v, agent in agents.items():
                        a = agent.act(obs[v])
                        nxt, r, done = env.step(v, a)
                        agent.remember(Transition(obs[v], a, r, nxt, done))
                        obs[v] = nxt
                        if per_step:
                            agent.replay()
                if not per_step:
                    for agent in agents.values():
                        agent.replay()
            except NumericalFailureError as exc:
                raise TrainingAborted(episode, v.value, stream.subject_id, exc) from exc
            for v in agents:
                row = MetricRow(episode, v.value, stream.subject_id, env.episode_score(v))
                rows.append(row)
                if on_episode is not None:
                    on_episode(row)
        for v, agent in agents.items():
            models[(stream.subject_id, v.value)] = agent

    metrics = RunMetrics(rows, config.seed, config.snapshot(),
                         wall_time=time.perf_counter() - t0, models=models)
    if out_dir is not None:
        write_run(metrics, out_dir)
    return metrics


def model_filename(subject: str, agent: str) -> str:
    return f"{subject}__{agent}.json"


def write_run(metrics: RunMetrics, out_dir, inputs: dict | None = None) -> dict:
    """Write ``metrics.csv``, one model document per agent, and ``manifest.json``.

    Nothing time-dependent is written, so equal runs give equal bytes.
    """
    out = Path(out_dir)
    (out / "models").mkdir(parents=True, exist_ok=True)
    metrics.write_csv(out / "metrics.csv")
    model_paths = {}
    for (subject, agent), dqn in sorted(metrics.models.items()):
        rel = Path("models") / model_filename(subject, agent)
        doc = dqn.to_document()
        (out / rel).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        model_paths[f"{subject}/{agent}"] = rel.as_posix()
    manifest = {
        "package_version": __version__,
        "seed": metrics.seed,
        "config": metrics.config,
        "inputs": inputs or {},
        "metrics": "metrics.csv",
        "models": model_paths,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n",
                                       encoding="utf-8")
    return manifest


def file_checksum(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------- evaluation

def evaluate_greedy(model, stream, monitor_length: int, vital=None) -> int:
    """Score of one greedy episode with learning disabled.

    ``model`` is a ``QNetwork``, a ``DQNAgent``, or a callable mapping an
    ``Observation`` to an action. ``stream`` is a ``SubjectStream`` or a bare
    series of raw readings.
    """
    net = model.net if isinstance(model, DQNAgent) else model
    model_vital = net.vital if isinstance(net, QNetwork) else None
    if vital is not None:
        vital = VitalKind.parse(vital)
        if model_vital is not None and vital is not model_vital:
            raise ConfigurationError(
                f"model monitors {model_vital.value}, stream is {vital.value}")
    vital = vital or model_vital
    if isinstance(stream, SubjectStream):
        if vital is None:
            if len(stream.vitals) != 1:
                raise ConfigurationError("vital is ambiguous; pass vital=")
            vital = stream.vitals[0]
        if vital not in stream.values:
            raise ConfigurationError(
                f"model monitors {vital.value} but stream {stream.subject_id} has no such column")
        series = stream.values[vital]
    else:
        if vital is None:
            raise ConfigurationError("vital is required for a bare series")
        series = stream
    if monitor_length == 0:
        return 0

    if isinstance(net, QNetwork):
        window = net.d_in
        policy = lambda obs: net.greedy_action(obs.features)  # noqa: E731
    else:
        window = 1
        policy = net
    env = VitalEnv(vital, series, monitor_length, window=window)
    obs = env.reset()
    done = False
    while not done:
        obs, _, done = env.step(int(policy(obs)))
    return env.episode_score()


# -------------------------------------------------------------------- sweeps

@dataclass(frozen=True)
class SweepGrid:
    param: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.param not in ("alpha", "gamma"):
            raise ConfigurationError(f"unsupported sweep parameter {self.param!r}")
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if not values:
            raise ConfigurationError("sweep grid is empty")
        for v in values:
            if self.param == "alpha" and not v > 0:
                raise ConfigurationError(f"alpha values must be > 0, got {v}")
            if self.param == "gamma" and not 0.0 <= v < 1.0:
                raise ConfigurationError(f"gamma values must lie in [0, 1), got {v}")


@dataclass(frozen=True)
class SweepRow:
    param: str
    value: float
    episode: int
    agent: str
    score: int


@dataclass
class SweepMetrics:
    grid: SweepGrid
    rows: list[SweepRow]
    runs: dict = field(default_factory=dict, compare=False, repr=False)

    def final_scores(self, agent) -> dict[float, int]:
        agent = VitalKind.parse(agent).value
        last: dict[float, tuple[int, int]] = {}
        for r in self.rows:
            if r.agent == agent and (r.value not in last or r.episode > last[r.value][0]):
                last[r.value] = (r.episode, r.score)
        return {v: s for v, (_, s) in last.items()}

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SWEEP_HEADER)
            for r in self.rows:
                w.writerow([r.param, repr(r.value), r.episode, r.agent, r.score])
        return path


def read_sweep_csv(path) -> list[SweepRow]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SWEEP_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [SweepRow(r["param"], float(r["value"]), int(r["episode"]), r["agent"],
                         int(r["score"])) for r in reader]


def run_sweep(streams, base: RunConfig, grid: SweepGrid) -> SweepMetrics:
    """One training run per grid value, everything else (seed included) fixed."""
    streams = _as_stream_list(streams)
    if len(streams) != 1:
        raise ConfigurationError("sweeps run on a single subject")
    rows, runs = [], {}
    for value in grid.values:
        try:
            config = replace(base, **{grid.param: value})
            metrics = run_training(streams, config)
        except Exception as exc:
            raise SweepError(grid.param, value, exc) from exc
        runs[value] = metrics
        for r in sorted(metrics.rows, key=lambda r: (r.agent, r.episode)):
            rows.append(SweepRow(grid.param, value, r.episode, r.agent, r.score))
    return SweepMetrics(grid, rows, runs)


# ------------------------------------------------------------------ analysis

def smoothed(scores: Sequence[float], window: int = 3) -> np.ndarray:
    """Trailing moving average; the first entries average what is available."""
    x = np.asarray(scores, dtype=float)
    c = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(1, len(x) + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def nondecreasing_pairs(scores: Iterable[float]) -> int:
    x = np.asarray(list(scores), dtype=float)
    return int(np.sum(np.diff(x) >= 0))
