"""Modified Early Warning Score lookup for single vital-sign readings.

Each vital owns a band table: half-open intervals ``[lo, hi)`` covering the
whole real line, each tagged with a score 0-4. The printed clinical table
uses integer (or one-decimal) ranges with gaps between them, e.g. heart rate
``40-49`` then ``50-99``; interval edges here sit at the midpoint of those
gaps so every printed value keeps its printed score.
"""
from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass
from types import MappingProxyType

from .errors import DomainError, InvalidCategoryError, InvalidMeasurementError

MET_LEVELS = 5
INF = math.inf


class VitalKind(str, enum.Enum):
    HEART_RATE = "heart_rate"
    RESPIRATORY_RATE = "resp_rate"
    OXYGEN_SATURATION = "spo2"
    TEMPERATURE = "temperature"
    SEDATION = "sedation"

    @classmethod
    def parse(cls, name: str | "VitalKind") -> "VitalKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            known = ", ".join(v.value for v in cls)
            raise ValueError(f"unknown vital {name!r} (expected one of: {known})") from None

    @property
    def is_categorical(self) -> bool:
        return self is VitalKind.SEDATION


# Physiological envelopes used for validation warnings and min-max scaling.
PLAUSIBLE_RANGES = MappingProxyType({
    VitalKind.HEART_RATE: (20.0, 240.0),
    VitalKind.RESPIRATORY_RATE: (0.0, 60.0),
    VitalKind.OXYGEN_SATURATION: (50.0, 100.0),
    VitalKind.TEMPERATURE: (30.0, 43.0),
})

SEDATION_SCORES = MappingProxyType({
    "awake": 0,
    "mild": 2,
    "moderate": 3,
    "severe": 4,
})


@dataclass(frozen=True)
class Band:
    lo: float
    hi: float
    score: int

    def __contains__(self, value: float) -> bool:
        return self.lo <= value < self.hi

    def clipped(self, lo: float, hi: float) -> tuple[float, float]:
        """The band intersected with ``[lo, hi]``."""
        return max(self.lo, lo), min(self.hi, hi)


class BandTable:
    """Sorted, gap-free partition of the real line into scored bands."""

    def __init__(self, edges, scores):
        edges = [float(e) for e in edges]
        scores = [int(s) for s in scores]
        if len(scores) != len(edges) + 1:
            raise ValueError("need exactly one more score than interior edges")
        if any(b <= a for a, b in zip(edges, edges[1:])):
            raise ValueError("edges must be strictly increasing")
        if any(not 0 <= s < MET_LEVELS for s in scores):
            raise ValueError("scores must lie in 0..4")
        self._edges = tuple(edges)
        self._scores = tuple(scores)
        bounds = [-INF, *edges, INF]
        self.bands = tuple(Band(lo, hi, s) for lo, hi, s in zip(bounds, bounds[1:], scores))

    @property
    def edges(self) -> tuple[float, ...]:
        return self._edges

    def score(self, value: float) -> int:
        return self._scores[bisect.bisect_right(self._edges, value)]

    def bands_for(self, score: int) -> list[Band]:
        return [b for b in self.bands if b.score == score]

    @property
    def max_score(self) -> int:
        return max(self._scores)

    def __iter__(self):
        return iter(self.bands)

    def __len__(self):
        return len(self.bands)


BAND_TABLES = MappingProxyType({
    VitalKind.HEART_RATE: BandTable(
        [39.5, 49.5, 99.5, 109.5, 129.5, 139.5], [4, 1, 0, 1, 2, 3, 4]),
    VitalKind.RESPIRATORY_RATE: BandTable(
        [4.5, 8.5, 20.5, 24.5, 30.5, 35.5], [4, 3, 0, 1, 2, 3, 4]),
    VitalKind.OXYGEN_SATURATION: BandTable(
        [84.5, 89.5, 92.5, 94.5], [4, 3, 2, 1, 0]),
    VitalKind.TEMPERATURE: BandTable(
        [34.05, 35.05, 36.05, 37.95, 38.55], [3, 2, 1, 0, 1, 2]),
})


def _sedation_score(label) -> int:
    try:
        return SEDATION_SCORES[str(label).strip().lower()]
    except KeyError:
        raise InvalidCategoryError(
            f"unknown sedation label {label!r} (expected Awake, Mild, Moderate or Severe)"
        ) from None


def classify(vital, value) -> int:
    """MEWS score (0-4) of one reading.

    ``value`` is in physical units (temperature in degrees Celsius). For
    ``VitalKind.SEDATION`` it is one of the labels Awake/Mild/Moderate/Severe.
    """
    vital = VitalKind.parse(vital)
    if vital.is_categorical:
        return _sedation_score(value)
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise InvalidMeasurementError(f"{vital.value}: not a number: {value!r}") from None
    if not math.isfinite(x):
        raise InvalidMeasurementError(f"{vital.value}: non-finite reading {value!r}")
    return BAND_TABLES[vital].score(x)


def met_for_score(score: int) -> int:
    """Alert level for a MEWS score; score ``s`` calls MET-``s``."""
    if not 0 <= int(score) < MET_LEVELS or int(score) != score:
        raise DomainError(f"MEWS score out of range: {score!r}")
    return int(score)


def max_attainable_score(vital) -> int:
    vital = VitalKind.parse(vital)
    if vital.is_categorical:
        return max(SEDATION_SCORES.values())
    return BAND_TABLES[vital].max_score
