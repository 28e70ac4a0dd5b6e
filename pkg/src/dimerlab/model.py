"""The dimer disorder ensemble, the Hamiltonian's action, and its spectrum.

The on-site potential takes the two values -V (probability p) and +V, and is
constant on site pairs (2y, 2y+1); a realization is stored per dimer and
looked up per site.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .seeding import stream_rng


class LengthMismatch(ValueError):
    """Disorder realization covers fewer dimers than the requested site range."""


@dataclass(frozen=True)
class DimerParams:
    """Potential amplitude V > 0 and probability p in (0,1) of the value -V."""

    V: float
    p: float

    def __post_init__(self) -> None:
        if not self.V > 0:
            raise ValueError(f"V must be positive, got {self.V}")
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie in (0,1), got {self.p}")


@dataclass(frozen=True)
class DisorderRealization:
    """A seeded, reproducible sequence of dimer potential values in {-V, +V}."""

    seed: int
    params: DimerParams
    dimer_values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.dimer_values.flags.writeable = False

    @property
    def n_dimers(self) -> int:
        return int(self.dimer_values.size)

    def site_value(self, x: int) -> float:
        """Potential at lattice site x >= 0; V(2y) = V(2y+1) by construction."""
        return float(self.dimer_values[x // 2])

    def site_values(self, n_sites: int) -> np.ndarray:
        if self.n_dimers * 2 < n_sites:
            raise LengthMismatch(
                f"{self.n_dimers} dimers cover {self.n_dimers * 2} sites, "
                f"need {n_sites}"
            )
        return np.repeat(self.dimer_values, 2)[:n_sites]

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "V": self.params.V,
                "p": self.params.p,
                "n_dimers": self.n_dimers,
                "values": self.dimer_values.tolist(),
            }
        )

    @staticmethod
    def from_json(text: str) -> "DisorderRealization":
        data = json.loads(text)
        values = np.asarray(data["values"], dtype=float)
        if len(values) != data["n_dimers"]:
            raise ValueError("n_dimers does not match the values array")
        return DisorderRealization(
            seed=int(data["seed"]),
            params=DimerParams(V=float(data["V"]), p=float(data["p"])),
            dimer_values=values,
        )


@dataclass(frozen=True)
class SpectrumSet:
    """Disjoint, sorted, maximal closed intervals."""

    intervals: tuple[tuple[float, float], ...]

    def contains(self, E: float, fatten: float = 0.0) -> bool:
        return any(a - fatten <= E <= b + fatten for a, b in self.intervals)

    @property
    def hull(self) -> tuple[float, float]:
        return (self.intervals[0][0], self.intervals[-1][1])


def sample_disorder(params: DimerParams, n_dimers: int, seed: int) -> DisorderRealization:
    """Draw n_dimers i.i.d. values, -V with probability p, from stream 0 of seed."""
    if n_dimers < 1:
        raise ValueError(f"n_dimers must be >= 1, got {n_dimers}")
    rng = stream_rng(seed, 0)
    values = np.where(rng.random(n_dimers) < params.p, -params.V, params.V)
    return DisorderRealization(seed=seed, params=params, dimer_values=values)


def apply_hamiltonian(u: np.ndarray, w: DisorderRealization) -> np.ndarray:
    """(Hu)(x) = u(x-1) + u(x+1) + V(x) u(x) with Dirichlet ends u(-1)=u(N)=0."""
    u = np.asarray(u)
    n = u.shape[0]
    out = w.site_values(n) * u
    out[1:] += u[:-1]
    out[:-1] += u[1:]
    return out


def almost_sure_spectrum(params: DimerParams) -> SpectrumSet:
    """Union of the two shifted bands [-V-2, -V+2] and [V-2, V+2], merged."""
    V = params.V
    lo_band = (-V - 2.0, -V + 2.0)
    hi_band = (V - 2.0, V + 2.0)
    if lo_band[1] >= hi_band[0]:
        return SpectrumSet(((lo_band[0], hi_band[1]),))
    return SpectrumSet((lo_band, hi_band))
