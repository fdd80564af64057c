"""Action x MEWS-score payoff table."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import DomainError, SchemaError
from .mews import MET_LEVELS

N_ACTIONS = MET_LEVELS
CORRECT_REWARD = 10

# Rows are actions 0..4, columns are MEWS scores in printed order 4, 3, 2, 1, 0.
TABLE_LAYOUT = (
    (-4, -3, -2, -1, 10),
    (-4, -3, -2, 10, -1),
    (-4, -3, 10, -1, -2),
    (-4, 10, -1, -2, -3),
    (10, -3, -2, -1, -4),
)


class RewardMatrix:
    """Immutable ``cell[action][score]`` reward lookup."""

    def __init__(self, cells):
        cells = np.array(cells, dtype=np.int64)
        if cells.shape != (N_ACTIONS, MET_LEVELS):
            raise DomainError(f"reward matrix must be 5x5, got {cells.shape}")
        cells.setflags(write=False)
        self._cells = cells

    @classmethod
    def from_layout(cls, rows) -> "RewardMatrix":
        """Build from rows of actions with columns ordered MEWS 4..0."""
        layout = np.array(rows, dtype=np.int64)
        if layout.shape != (N_ACTIONS, MET_LEVELS):
            raise DomainError(f"reward table must be 5x5, got {layout.shape}")
        return cls(layout[:, ::-1])

    @classmethod
    def default(cls) -> "RewardMatrix":
        return cls.from_layout(TABLE_LAYOUT)

    @classmethod
    def from_csv(cls, path) -> "RewardMatrix":
        """Load a headerless 5x5 integer CSV in the printed layout."""
        path = Path(path)
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
        if len(rows) != N_ACTIONS or any(len(r) != MET_LEVELS for r in rows):
            raise SchemaError(f"{path}: expected 5 rows of 5 integers")
        try:
            parsed = [[int(c) for c in r] for r in rows]
        except ValueError as exc:
            raise SchemaError(f"{path}: {exc}") from None
        return cls.from_layout(parsed)

    def to_layout(self) -> list[list[int]]:
        return self._cells[:, ::-1].tolist()

    @property
    def cells(self) -> np.ndarray:
        return self._cells

    def reward(self, score: int, action: int) -> int:
        _check(score, "score")
        _check(action, "action")
        return int(self._cells[action, score])

    def best_action(self, score: int) -> int:
        _check(score, "score")
        return int(np.argmax(self._cells[:, score]))

    def __eq__(self, other):
        return isinstance(other, RewardMatrix) and np.array_equal(self._cells, other._cells)

    def __repr__(self):
        return f"RewardMatrix({self.to_layout()!r})"


def _check(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, np.integer)) or not 0 <= x < N_ACTIONS:
        raise DomainError(f"{what} must be an integer in 0..4, got {x!r}")


DEFAULT_REWARDS = RewardMatrix.default()


def reward(score: int, action: int, matrix: RewardMatrix | None = None) -> int:
    return (matrix or DEFAULT_REWARDS).reward(score, action)


def best_action(score: int, matrix: RewardMatrix | None = None) -> int:
    return (matrix or DEFAULT_REWARDS).best_action(score)
