"""Vital-sign streams: CSV ingestion, normalization and a band-dwell synthesizer.

CSV schema (comma separated, UTF-8, one header row)::

    timestamp,heart_rate,resp_rate,temperature[,spo2][,sedation]

Rows are assumed to be pre-aligned samples. Empty or ``nan`` cells are filled
by carrying the previous valid value forward.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import (
    CsvParseError,
    SchemaError,
    SpecError,
    UnrecoverableGapError,
)
from .mews import BAND_TABLES, MET_LEVELS, PLAUSIBLE_RANGES, SEDATION_SCORES, VitalKind
from .seeding import rng_for

REQUIRED_COLUMNS = ("timestamp", "heart_rate", "resp_rate", "temperature")
OPTIONAL_COLUMNS = ("spo2", "sedation")
COLUMN_ORDER = REQUIRED_COLUMNS + OPTIONAL_COLUMNS
MISSING_TOKENS = {"", "nan", "na", "n/a", "null"}


class PlausibilityWarning(UserWarning):
    """Readings fall outside the vital's physiological envelope."""


@dataclass
class SubjectStream:
    subject_id: str
    timestamps: np.ndarray
    values: dict[VitalKind, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=float)
        if self.timestamps.ndim != 1:
            raise SchemaError("timestamps must be one-dimensional")
        if np.any(np.diff(self.timestamps) <= 0):
            raise SchemaError(f"{self.subject_id}: timestamps must be strictly increasing")
        for vital, series in list(self.values.items()):
            vital = VitalKind.parse(vital)
            dtype = object if vital.is_categorical else float
            series = np.asarray(series, dtype=dtype)
            if series.shape != self.timestamps.shape:
                raise SchemaError(
                    f"{self.subject_id}: {vital.value} has {series.shape[0]} samples, "
                    f"expected {self.timestamps.shape[0]}"
                )
            self.values[vital] = series

    @property
    def sample_count(self) -> int:
        return int(self.timestamps.shape[0])

    @property
    def vitals(self) -> list[VitalKind]:
        return list(self.values)

    def __getitem__(self, vital) -> np.ndarray:
        return self.values[VitalKind.parse(vital)]


def normalize(vital, raw_value: float) -> float:
    """Min-max scale onto the vital's plausible range, clamped to [0, 1]."""
    lo, hi = PLAUSIBLE_RANGES[VitalKind.parse(vital)]
    return min(1.0, max(0.0, (float(raw_value) - lo) / (hi - lo)))


def normalize_array(vital, raw: np.ndarray) -> np.ndarray:
    lo, hi = PLAUSIBLE_RANGES[VitalKind.parse(vital)]
    return np.clip((np.asarray(raw, dtype=float) - lo) / (hi - lo), 0.0, 1.0)


def fahrenheit_to_celsius(value):
    return (value - 32.0) * 5.0 / 9.0


# ---------------------------------------------------------------- ingestion

def load_csv(path, temp_unit: str = "celsius") -> list[SubjectStream]:
    """Read one subject per CSV file.

    ``path`` may be a file or a directory of ``*.csv`` files (sorted by name);
    the file stem becomes the subject id.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.csv"))
        if not files:
            raise FileNotFoundError(f"no .csv files in {path}")
        return [_load_one(f, temp_unit) for f in files]
    return [_load_one(path, temp_unit)]


def _load_one(path: Path, temp_unit: str) -> SubjectStream:
    unit = temp_unit.lower()
    if unit in ("f", "fahrenheit"):
        to_celsius = True
    elif unit in ("c", "celsius"):
        to_celsius = False
    else:
        raise ValueError(f"unknown temperature unit {temp_unit!r}")

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, missing header") from None
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns: {', '.join(missing)}")
        unknown = [c for c in header if c not in COLUMN_ORDER]
        if unknown:
            raise SchemaError(f"{path}: unknown columns: {', '.join(unknown)}")
        if len(set(header)) != len(header):
            raise SchemaError(f"{path}: duplicate columns in header")
        rows = [r for r in reader if r]

    columns: dict[str, list] = {name: [] for name in header}
    for row_no, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise CsvParseError(row_no, None, f"expected {len(header)} cells, got {len(row)}")
        for name, cell in zip(header, row):
            columns[name].append(_parse_cell(name, cell.strip(), row_no))

    timestamps = columns.pop("timestamp")
    if any(t is None for t in timestamps):
        row = 2 + next(i for i, t in enumerate(timestamps) if t is None)
        raise CsvParseError(row, "timestamp", "missing timestamp")

    values = {}
    for name, cells in columns.items():
        vital = VitalKind(name)
        filled = _carry_forward(cells, vital, path)
        if vital is VitalKind.TEMPERATURE and to_celsius:
            filled = [fahrenheit_to_celsius(v) for v in filled]
        if not vital.is_categorical:
            _warn_implausible(vital, filled, path)
        values[vital] = filled
    return SubjectStream(path.stem, np.array(timestamps, dtype=float), values)


def _parse_cell(name: str, cell: str, row_no: int):
    if cell.lower() in MISSING_TOKENS:
        return None
    if name == "sedation":
        if cell.lower() not in SEDATION_SCORES:
            raise CsvParseError(row_no, name, f"unknown sedation label {cell!r}")
        return cell
    try:
        x = float(cell)
    except ValueError:
        raise CsvParseError(row_no, name, f"not a number: {cell!r}") from None
    if math.isnan(x):
        return None
    if not math.isfinite(x):
        raise CsvParseError(row_no, name, f"non-finite value {cell!r}")
    return x


def _carry_forward(cells: list, vital: VitalKind, path: Path) -> list:
    if cells and cells[0] is None:
        raise UnrecoverableGapError(f"{path}: first {vital.value} value is missing")
    out, last = [], None
    for c in cells:
        last = c if c is not None else last
        out.append(last)
    return out


def _warn_implausible(vital: VitalKind, values, path) -> None:
    lo, hi = PLAUSIBLE_RANGES[vital]
    bad = sum(1 for v in values if not lo <= v <= hi)
    if bad:
        warnings.warn(
            f"{path}: {bad} {vital.value} readings outside plausible range [{lo}, {hi}]",
            PlausibilityWarning,
            stacklevel=3,
        )


def write_csv(stream: SubjectStream, path) -> Path:
    """Write in the ingestion schema. Floats use shortest round-trip repr."""
    present = {v.value for v in stream.vitals}
    missing = [c for c in REQUIRED_COLUMNS[1:] if c not in present]
    if missing:
        raise SchemaError(f"cannot write {stream.subject_id}: missing columns {', '.join(missing)}")
    header = [c for c in COLUMN_ORDER if c == "timestamp" or c in present]
    path = Path(path)
    series = [stream.timestamps] + [stream.values[VitalKind(c)] for c in header[1:]]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*series):
            w.writerow([repr(float(x)) if not isinstance(x, str) else x for x in row])
    return path


# ---------------------------------------------------------------- synthesis

NAMED_PROFILES = {
    # fraction of samples spent at MEWS scores 0..4
    "uniform": (1, 1, 1, 1, 1),
    "normal": (0.6, 0.15, 0.1, 0.1, 0.05),
    "calm": (1, 0, 0, 0, 0),
}


def resolve_profile(vital, profile) -> tuple[float, ...]:
    """Turn a named profile or weight list into fractions over scores 0..4.

    Named profiles drop the scores a vital cannot attain before renormalizing
    (temperature has no score-4 band).
    """
    vital = VitalKind.parse(vital)
    if isinstance(profile, str):
        try:
            weights = list(NAMED_PROFILES[profile])
        except KeyError:
            raise SpecError(f"unknown profile {profile!r}") from None
        top = BAND_TABLES[vital].max_score
        weights = [w if s <= top else 0.0 for s, w in enumerate(weights)]
        total = sum(weights)
        return tuple(w / total for w in weights)
    fractions = tuple(float(f) for f in profile)
    if len(fractions) != MET_LEVELS:
        raise SpecError(f"{vital.value}: profile needs 5 fractions, got {len(fractions)}")
    return fractions


@dataclass(frozen=True)
class SynthSpec:
    """Band-dwell description of a synthetic subject.

    ``profiles`` maps each vital to the fraction of samples at each MEWS
    score 0..4. Samples are generated in runs of ``dwell`` consecutive steps
    in the same band; run order is shuffled from the seed.
    """

    length: int
    profiles: Mapping[VitalKind, tuple[float, ...]]
    noise_std: float = 0.5
    seed: int = 0
    dwell: int = 10
    subject_id: str = "synth"

    def __post_init__(self):
        if int(self.length) < 1:
            raise SpecError("length must be positive")
        if self.noise_std < 0 or not math.isfinite(self.noise_std):
            raise SpecError("noise_std must be finite and >= 0")
        if int(self.dwell) < 1:
            raise SpecError("dwell must be >= 1")
        if not self.profiles:
            raise SpecError("at least one vital profile is required")
        clean = {}
        for vital, fractions in self.profiles.items():
            vital = VitalKind.parse(vital)
            if vital.is_categorical:
                raise SpecError("sedation streams are not synthesized")
            fractions = resolve_profile(vital, fractions)
            if any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
                raise SpecError(f"{vital.value}: fractions must be >= 0 and sum to 1")
            clean[vital] = fractions
        object.__setattr__(self, "profiles", clean)

    @classmethod
    def named(cls, profile: str, vitals, length: int, **kw) -> "SynthSpec":
        return cls(length=length, profiles={VitalKind.parse(v): profile for v in vitals}, **kw)

    @classmethod
    def from_document(cls, doc: dict, **overrides) -> "SynthSpec":
        """Build from a JSON-style mapping (see ``load_synth_spec``)."""
        kw = {k: doc[k] for k in ("length", "noise_std", "seed", "dwell", "subject_id") if k in doc}
        kw.update({k: v for k, v in overrides.items() if v is not None})
        profiles = doc.get("profiles")
        if not isinstance(profiles, dict):
            raise SpecError("spec document needs a 'profiles' mapping")
        return cls(profiles={VitalKind.parse(k): v for k, v in profiles.items()}, **kw)


def load_synth_spec(path, **overrides) -> SynthSpec:
    with Path(path).open(encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: {exc}") from None
    return SynthSpec.from_document(doc, **overrides)


def band_counts(fractions, length: int) -> list[int]:
    """Largest-remainder apportionment of ``length`` samples across bands."""
    raw = [f * length for f in fractions]
    counts = [int(math.floor(r)) for r in raw]
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[: length - sum(counts)]:
        counts[i] += 1
    return counts


def _score_intervals(vital: VitalKind, score: int) -> list[tuple[float, float]]:
    lo, hi = PLAUSIBLE_RANGES[vital]
    out = []
    for band in BAND_TABLES[vital].bands_for(score):
        a, b = band.clipped(lo, hi)
        if b > a:
            out.append((a, b))
    return out


def _synth_vital(vital: VitalKind, fractions, spec: SynthSpec) -> np.ndarray:
    rng = rng_for(spec.seed, "synth", spec.subject_id, vital.value)
    counts = band_counts(fractions, spec.length)
    intervals = {s: _score_intervals(vital, s) for s in range(MET_LEVELS)}
    for score, n in enumerate(counts):
        if n and not intervals[score]:
            raise SpecError(
                f"{vital.value}: MEWS score {score} has a zero-width band and cannot be generated"
            )

    runs = []
    for score, n in enumerate(counts):
        full, rest = divmod(n, spec.dwell)
        runs += [(score, spec.dwell)] * full + ([(score, rest)] if rest else [])
    order = rng.permutation(len(runs))

    out = np.empty(spec.length)
    pos = 0
    visits = [0] * MET_LEVELS
    for idx in order:
        score, n = runs[idx]
        # alternate between the score's intervals (e.g. low and high heart rate)
        a, b = intervals[score][visits[score] % len(intervals[score])]
        visits[score] += 1
        centre = 0.5 * (a + b)
        noise = rng.normal(0.0, spec.noise_std, n) if spec.noise_std > 0 else np.zeros(n)
        top = np.nextafter(b, -np.inf)
        out[pos:pos + n] = np.clip(centre + noise, a, top)
        pos += n
    return out


def synthesize(spec: SynthSpec) -> SubjectStream:
    values = {v: _synth_vital(v, f, spec) for v, f in spec.profiles.items()}
    return SubjectStream(spec.subject_id, np.arange(spec.length, dtype=float), values)
