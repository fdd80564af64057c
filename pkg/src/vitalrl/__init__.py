"""Multi-agent deep Q-learning for vital-sign early-warning monitoring."""

__version__ = "0.1.0"

from .mews import VitalKind, classify, max_attainable_score, met_for_score  # noqa: E402
from .rewards import RewardMatrix, best_action, reward  # noqa: E402

__all__ = [
    "RewardMatrix",
    "VitalKind",
    "best_action",
    "classify",
    "max_attainable_score",
    "met_for_score",
    "reward",
]
