"""Named random sub-streams derived from a single run seed.

Every stochastic component asks for a generator by name, e.g.
``rng_for(seed, "explore", subject, vital)``. Streams with different names
are statistically independent, and adding a new consumer never shifts the
draws seen by an existing one.
"""
from __future__ import annotations

import hashlib
import os

import numpy as np

SEED_ENV_VAR = "VITALRL_SEED"
DEFAULT_SEED = 0


def _name_key(name) -> int:
    digest = hashlib.sha256(str(name).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def rng_for(seed: int, *names) -> np.random.Generator:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    entropy = [seed, *(_name_key(n) for n in names)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    return int(raw) if raw not in (None, "") else DEFAULT_SEED
