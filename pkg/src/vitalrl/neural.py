"""Numpy multilayer perceptron Q-function with Adam.

Architecture: ``input -> relu hidden -> linear output`` with one output per
alert action. Training regresses only the output of the action actually
taken toward its TD target; the other outputs receive no gradient.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ModelParseError, NumericalFailureError, ShapeError, UnsupportedVersionError
from .mews import VitalKind

SCHEMA_VERSION = 1
DOCUMENT_KIND = "vitalrl.qnetwork"
N_OUTPUTS = 5
PARAM_NAMES = ("W1", "b1", "W2", "b2")


@dataclass(frozen=True)
class TargetSpec:
    reward: float
    gamma: float
    next_q: tuple[float, ...]
    done: bool


def td_target(spec: TargetSpec) -> float:
    """``r`` on terminal transitions, else ``r + gamma * max(next_q)``."""
    if spec.done:
        return float(spec.reward)
    return float(spec.reward) + spec.gamma * float(np.max(spec.next_q))


def td_targets(rewards, gamma: float, next_q: np.ndarray, done) -> np.ndarray:
    """Vectorized ``td_target`` over a batch."""
    rewards = np.asarray(rewards, dtype=float)
    done = np.asarray(done, dtype=bool)
    return np.where(done, rewards, rewards + gamma * next_q.max(axis=1))


class QNetwork:
    def __init__(self, d_in: int = 1, d_hidden: int = 24, *, learning_rate: float = 1e-3,
                 rng: np.random.Generator | None = None, vital=None,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if d_in < 1 or d_hidden < 1:
            raise ShapeError("layer sizes must be positive")
        if not learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        self.d_in = int(d_in)
        self.d_hidden = int(d_hidden)
        self.d_out = N_OUTPUTS
        self.learning_rate = float(learning_rate)
        self.beta1, self.beta2, self.eps = float(beta1), float(beta2), float(eps)
        self.vital = VitalKind.parse(vital) if vital is not None else None
        self.config: dict = {}
        self.seed: int | None = None

        rng = rng if rng is not None else np.random.default_rng(0)
        s1 = 1.0 / math.sqrt(self.d_in)
        s2 = 1.0 / math.sqrt(self.d_hidden)
        self.params = {
            "W1": rng.uniform(-s1, s1, (self.d_hidden, self.d_in)),
            "b1": rng.uniform(-s1, s1, self.d_hidden),
            "W2": rng.uniform(-s2, s2, (self.d_out, self.d_hidden)),
            "b2": rng.uniform(-s2, s2, self.d_out),
        }
        self.m = {k: np.zeros_like(v) for k, v in self.params.items()}
        self.v = {k: np.zeros_like(v) for k, v in self.params.items()}
        self.step_count = 0

    @classmethod
    def zeros(cls, d_in: int = 1, d_hidden: int = 24, **kw) -> "QNetwork":
        net = cls(d_in, d_hidden, **kw)
        for p in net.params.values():
            p[...] = 0.0
        return net

    # -- evaluation -------------------------------------------------------

    def _as_batch(self, x) -> tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.d_in:
            raise ShapeError(f"expected input of dimension {self.d_in}, got shape {np.shape(x)}")
        return x, single

    def forward(self, x) -> np.ndarray:
        """Q-values for one state (shape ``(d_in,)``) or a batch ``(B, d_in)``."""
        x, single = self._as_batch(x)
        p = self.params
        h = np.maximum(x @ p["W1"].T + p["b1"], 0.0)
        q = h @ p["W2"].T + p["b2"]
        return q[0] if single else q

    def greedy_action(self, x) -> int:
        return int(np.argmax(self.forward(x)))

    def loss_and_grads(self, states, actions, targets):
        """Masked mean-squared TD error and its gradient for every parameter."""
        x, _ = self._as_batch(states)
        actions = np.asarray(actions, dtype=np.int64)
        targets = np.asarray(targets, dtype=float)
        n = x.shape[0]
        if actions.shape != (n,) or targets.shape != (n,):
            raise ShapeError("states, actions and targets must have matching batch length")
        p = self.params
        z = x @ p["W1"].T + p["b1"]
        h = np.maximum(z, 0.0)
        q = h @ p["W2"].T + p["b2"]
        rows = np.arange(n)
        err = q[rows, actions] - targets
        loss = float(np.mean(err * err))

        dq = np.zeros_like(q)
        dq[rows, actions] = 2.0 * err / n
        dz = (dq @ p["W2"]) * (z > 0)
        grads = {
            "W1": dz.T @ x,
            "b1": dz.sum(axis=0),
            "W2": dq.T @ h,
            "b2": dq.sum(axis=0),
        }
        return loss, grads

    # -- training ---------------------------------------------------------

    def train_arrays(self, states, actions, targets) -> float:
        """One Adam step; returns the loss measured before the step."""
        if len(actions) == 0:
            raise ValueError("empty batch")
        with np.errstate(over="ignore", invalid="ignore"):
            loss, grads = self.loss_and_grads(states, actions, targets)
        if not math.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
            raise NumericalFailureError(f"non-finite loss or gradient (loss={loss})")

        saved = (
            {k: v.copy() for k, v in self.params.items()},
            {k: v.copy() for k, v in self.m.items()},
            {k: v.copy() for k, v in self.v.items()},
            self.step_count,
        )
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** t
        c2 = 1.0 - b2 ** t
        with np.errstate(over="ignore", invalid="ignore"):
            for k, g in grads.items():
                self.m[k] = b1 * self.m[k] + (1.0 - b1) * g
                self.v[k] = b2 * self.v[k] + (1.0 - b2) * g * g
                self.params[k] = self.params[k] - self.learning_rate * (self.m[k] / c1) / (
                    np.sqrt(self.v[k] / c2) + self.eps)

        if not all(np.all(np.isfinite(v)) for v in self.params.values()):
            self.params, self.m, self.v, self.step_count = saved
            raise NumericalFailureError("parameters became non-finite; step rolled back")
        return loss

    def train_step(self, batch) -> float:
        """``batch`` is a sequence of ``(state, action, target)`` triples."""
        batch = list(batch)
        if not batch:
            raise ValueError("empty batch")
        states = np.array([np.asarray(s, dtype=float).reshape(-1) for s, _, _ in batch])
        actions = np.array([a for _, a, _ in batch], dtype=np.int64)
        targets = np.array([t for _, _, t in batch], dtype=float)
        if not np.all(np.isfinite(targets)):
            raise NumericalFailureError("non-finite TD target in batch")
        return self.train_arrays(states, actions, targets)

    # -- persistence ------------------------------------------------------

    def copy(self) -> "QNetwork":
        return load(save(self))

    def to_document(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": DOCUMENT_KIND,
            "vital": self.vital.value if self.vital is not None else None,
            "dims": {"input": self.d_in, "hidden": self.d_hidden, "output": self.d_out},
            "learning_rate": self.learning_rate,
            "weights": {k: self.params[k].ravel().tolist() for k in PARAM_NAMES},
            "adam": {
                "beta1": self.beta1,
                "beta2": self.beta2,
                "eps": self.eps,
                "step": self.step_count,
                "m": {k: self.m[k].ravel().tolist() for k in PARAM_NAMES},
                "v": {k: self.v[k].ravel().tolist() for k in PARAM_NAMES},
            },
            "config": self.config,
            "seed": self.seed,
        }


def forward(net: QNetwork, state) -> np.ndarray:
    return net.forward(state)


def train_step(net: QNetwork, batch) -> float:
    return net.train_step(batch)


def save(net: QNetwork) -> str:
    """Serialize to a JSON text document.

    Floats are written with Python's shortest round-trip repr, so loading
    reproduces every parameter bit for bit.
    """
    return json.dumps(net.to_document(), indent=1, sort_keys=True, allow_nan=False) + "\n"


def save_file(net: QNetwork, path) -> Path:
    path = Path(path)
    path.write_text(save(net), encoding="utf-8")
    return path


def load_file(path) -> QNetwork:
    return load(Path(path).read_text(encoding="utf-8"))


def _field(doc, path: str):
    cur = doc
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise ModelParseError(path, "missing field")
        cur = cur[part]
    return cur


def _int_field(doc, path: str, minimum: int = 0) -> int:
    v = _field(doc, path)
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ModelParseError(path, f"expected integer >= {minimum}, got {v!r}")
    return v


def _float_field(doc, path: str) -> float:
    v = _field(doc, path)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ModelParseError(path, f"expected finite number, got {v!r}")
    return float(v)


def _array_field(doc, path: str, shape) -> np.ndarray:
    raw = _field(doc, path)
    if not isinstance(raw, list) or len(raw) != int(np.prod(shape)):
        raise ModelParseError(path, f"expected {int(np.prod(shape))} numbers")
    if any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in raw):
        raise ModelParseError(path, "non-numeric entry")
    arr = np.array(raw, dtype=float).reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise ModelParseError(path, "non-finite entry")
    return arr


def load(document) -> QNetwork:
    """Rebuild a network from ``save`` output (a string or parsed mapping)."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ModelParseError("<document>", f"invalid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ModelParseError("<document>", "top level must be an object")
    version = _field(doc, "schema_version")
    if version != SCHEMA_VERSION:
        raise UnsupportedVersionError("schema_version", f"unsupported version {version!r}")
    if doc.get("kind") != DOCUMENT_KIND:
        raise ModelParseError("kind", f"expected {DOCUMENT_KIND!r}")

    d_in = _int_field(doc, "dims.input", 1)
    d_h = _int_field(doc, "dims.hidden", 1)
    if _int_field(doc, "dims.output", 1) != N_OUTPUTS:
        raise ModelParseError("dims.output", f"must be {N_OUTPUTS}")
    vital = doc.get("vital")
    try:
        vital = VitalKind.parse(vital) if vital is not None else None
    except ValueError as exc:
        raise ModelParseError("vital", str(exc)) from None
    lr = _float_field(doc, "learning_rate")
    if lr <= 0:
        raise ModelParseError("learning_rate", "must be > 0")

    net = QNetwork(d_in, d_h, learning_rate=lr, vital=vital,
                   beta1=_float_field(doc, "adam.beta1"),
                   beta2=_float_field(doc, "adam.beta2"),
                   eps=_float_field(doc, "adam.eps"))
    shapes = {"W1": (d_h, d_in), "b1": (d_h,), "W2": (N_OUTPUTS, d_h), "b2": (N_OUTPUTS,)}
    for k, shape in shapes.items():
        net.params[k] = _array_field(doc, f"weights.{k}", shape)
        net.m[k] = _array_field(doc, f"adam.m.{k}", shape)
        net.v[k] = _array_field(doc, f"adam.v.{k}", shape)
    net.step_count = _int_field(doc, "adam.step")
    config = doc.get("config", {})
    if not isinstance(config, dict):
        raise ModelParseError("config", "expected an object")
    net.config = config
    seed = doc.get("seed")
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ModelParseError("seed", f"expected integer, got {seed!r}")
    net.seed = seed
    return net
