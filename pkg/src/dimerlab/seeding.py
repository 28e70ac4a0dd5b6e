"""Deterministic per-stream seeding for parallel Monte Carlo.

Stream i of a master seed is derived with a splitmix64-style avalanche mix,
so distinct streams are decorrelated, reproducible bit-for-bit, and
independent of platform or evaluation order.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
# splitmix64 constants (Steele, Lea, Flood 2014).
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(master_seed: int, stream: int) -> int:
    """64-bit avalanche mix of (master_seed, stream)."""
    z = (master_seed + (stream + 1) * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def stream_rng(master_seed: int, stream: int) -> np.random.Generator:
    """Reproducible generator for one work item of a seeded sweep."""
    return np.random.Generator(np.random.PCG64(mix64(master_seed, stream)))
