"""Monte Carlo Lyapunov exponents and the exact criticality classifier.

The exponent is accumulated over products of two-step (per-dimer) transfer
matrices with per-step vector renormalization, which is unconditionally
overflow-safe.  Exponents are reported per dimer (one two-step matrix) and
per site (half of that).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

from .mat2 import SpectralClass, classify, two_step_transfer
from .model import DimerParams
from .seeding import stream_rng

CRITICAL_TOL = 1e-9


class InsufficientSignal(RuntimeError):
    """Too few Lyapunov estimates rise above their noise floor for a fit."""


class NumericOverflow(RuntimeError):
    """Internal error: a renormalized step produced a non-finite norm."""


class Verdict(Enum):
    RESONANCE_CRITICAL = "ResonanceCritical"
    WALK_CRITICAL = "WalkCritical"
    POSITIVE_EXPONENT = "PositiveExponent"


@dataclass(frozen=True)
class LyapunovEstimate:
    energy: float
    gamma_per_dimer: float
    n_steps: int
    n_realizations: int
    std_error: float

    @property
    def gamma_per_site(self) -> float:
        return self.gamma_per_dimer / 2.0


@dataclass(frozen=True)
class CriticalityReport:
    verdict: Verdict
    alpha: float
    beta: float
    class_alpha: SpectralClass
    class_beta: SpectralClass
    matched_condition: str


@dataclass(frozen=True)
class QuadraticFit:
    """Log-log fit of gamma against the distance to a critical energy."""

    pooled_slope: float
    slope_above: float
    slope_below: float
    offsets: tuple[float, ...]
    gammas_above: tuple[float, ...]
    gammas_below: tuple[float, ...]


@njit(cache=True)
def _log_growth_sum(bits, pa, pb, pc, pd, ma, mb, mc, md, w0, w1):
    """Sum of ln||T w|| over the renormalized orbit of (w0, w1)."""
    acc = 0.0
    for k in range(bits.size):
        if bits[k]:
            x0 = ma * w0 + mb * w1
            x1 = mc * w0 + md * w1
        else:
            x0 = pa * w0 + pb * w1
            x1 = pc * w0 + pd * w1
        r = math.sqrt(x0 * x0 + x1 * x1)
        acc += math.log(r)
        w0 = x0 / r
        w1 = x1 / r
    return acc


@njit(cache=True)
def _log_norm_series(bits, pa, pb, pc, pd, ma, mb, mc, md, stride):
    """ln||T_n ... T_1|| (operator 2-norm) sampled every `stride` steps."""
    m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
    acc = 0.0
    out = np.empty(bits.size // stride)
    j = 0
    for k in range(bits.size):
        if bits[k]:
            n00 = ma * m00 + mb * m10
            n01 = ma * m01 + mb * m11
            n10 = mc * m00 + md * m10
            n11 = mc * m01 + md * m11
        else:
            n00 = pa * m00 + pb * m10
            n01 = pa * m01 + pb * m11
            n10 = pc * m00 + pd * m10
            n11 = pc * m01 + pd * m11
        f = math.sqrt(n00 * n00 + n01 * n01 + n10 * n10 + n11 * n11)
        acc += math.log(f)
        m00, m01, m10, m11 = n00 / f, n01 / f, n10 / f, n11 / f
        if (k + 1) % stride == 0:
            e = m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11
            det = m00 * m11 - m01 * m10
            disc = e * e - 4.0 * det * det
            if disc < 0.0:
                disc = 0.0
            s1 = math.sqrt((e + math.sqrt(disc)) / 2.0)
            out[j] = acc + math.log(s1)
            j += 1
    return out


def _transfer_entries(params: DimerParams, E: float):
    plus = two_step_transfer(E, params.V)
    minus = two_step_transfer(E, -params.V)
    return plus.entries(), minus.entries()


def estimate_gamma(
    params: DimerParams,
    E: float,
    n_steps: int,
    n_realizations: int,
    seed: int,
    initial=(1.0, 0.0),
) -> LyapunovEstimate:
    """Lyapunov exponent per dimer from independent seeded disorder streams.

    Each realization iterates a unit 2-vector through n_steps random two-step
    matrices (value -V with probability p) and averages the accumulated log
    growth; the estimate is the mean over realizations.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if n_realizations < 1:
        raise ValueError(f"n_realizations must be >= 1, got {n_realizations}")
    (pa, pb, pc, pd), (ma, mb, mc, md) = _transfer_entries(params, E)
    gammas = np.empty(n_realizations)
    for r in range(n_realizations):
        rng = stream_rng(seed, r)
        bits = rng.random(n_steps) < params.p
        acc = _log_growth_sum(
            bits, pa, pb, pc, pd, ma, mb, mc, md, initial[0], initial[1]
        )
        if not math.isfinite(acc):
            raise NumericOverflow(f"non-finite log growth at E={E}")
        gammas[r] = acc / n_steps
    std_error = (
        float(gammas.std(ddof=1) / math.sqrt(n_realizations))
        if n_realizations > 1
        else 0.0
    )
    return LyapunovEstimate(
        energy=E,
        gamma_per_dimer=float(gammas.mean()),
        n_steps=n_steps,
        n_realizations=n_realizations,
        std_error=std_error,
    )


def log_norm_series(
    params: DimerParams, E: float, n_steps: int, seed: int, stride: int = 1
) -> np.ndarray:
    """Diagnostic series ln||T_n ... T_1|| for one realization (stream 0)."""
    (pa, pb, pc, pd), (ma, mb, mc, md) = _transfer_entries(params, E)
    rng = stream_rng(seed, 0)
    bits = rng.random(n_steps) < params.p
    return _log_norm_series(bits, pa, pb, pc, pd, ma, mb, mc, md, stride)


def scan_gamma(
    params: DimerParams,
    grid,
    n_steps: int,
    n_realizations: int,
    seed: int,
) -> list[LyapunovEstimate]:
    """One estimate per grid energy, sharing disorder streams across energies."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("energy grid is empty")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("energy grid must be strictly increasing")
    return [
        estimate_gamma(params, float(E), n_steps, n_realizations, seed) for E in grid
    ]


def classify_criticality(params: DimerParams, E: float) -> CriticalityReport:
    """Exact verdict on whether gamma(E) vanishes, from the case analysis.

    Resonance criticality (|E| = V <= 1) comes from the two-step matrix at
    v = E being -Id while its partner has spectral radius 1; walk criticality
    covers the couples (V=1/sqrt(2), E=+-3/sqrt(2)) and (V=sqrt(2), E=0).
    """
    V, tol = params.V, CRITICAL_TOL
    alpha = E - V
    beta = E + V
    class_alpha = classify(two_step_transfer(E, V))
    class_beta = classify(two_step_transfer(E, -V))

    def report(verdict, tag):
        return CriticalityReport(verdict, alpha, beta, class_alpha, class_beta, tag)

    if abs(abs(E) - V) <= tol and V <= 1.0 + tol:
        sign = "+" if E >= 0 else "-"
        return report(Verdict.RESONANCE_CRITICAL, f"E={sign}V, V<=1")
    a2 = abs(alpha * alpha - 2.0) <= tol
    b2 = abs(beta * beta - 2.0) <= tol
    if a2 and b2:
        return report(Verdict.WALK_CRITICAL, "alpha^2=2, beta^2=2")
    if b2 and abs(alpha - 2.0 * beta) <= tol:
        return report(Verdict.WALK_CRITICAL, "beta^2=2, alpha=2*beta")
    if a2 and abs(beta - 2.0 * alpha) <= tol:
        return report(Verdict.WALK_CRITICAL, "alpha^2=2, beta=2*alpha")
    return report(Verdict.POSITIVE_EXPONENT, "none")


def fit_quadratic_vanishing(
    params: DimerParams,
    E_c: float,
    offsets,
    n_steps: int,
    n_realizations: int,
    seed: int,
) -> QuadraticFit:
    """Slope of ln gamma vs ln |E - E_c| on both sides of a resonance energy.

    Offsets whose estimate is below three standard errors are excluded as
    noise; fewer than four surviving points is an error.
    """
    offsets = sorted(float(d) for d in offsets)
    if any(d <= 0 for d in offsets):
        raise ValueError("offsets must be positive")
    verdict = classify_criticality(params, E_c).verdict
    if verdict is not Verdict.RESONANCE_CRITICAL:
        raise ValueError(f"E_c={E_c} is not resonance-critical for V={params.V}")

    sides: dict[int, list[tuple[float, float]]] = {+1: [], -1: []}
    for sign in (+1, -1):
        for delta in offsets:
            est = estimate_gamma(
                params, E_c + sign * delta, n_steps, n_realizations, seed
            )
            if est.gamma_per_dimer > 3.0 * est.std_error:
                sides[sign].append((delta, est.gamma_per_dimer))
    n_kept = len(sides[+1]) + len(sides[-1])
    if n_kept < 4:
        raise InsufficientSignal(
            f"only {n_kept} offsets exceed 3 sigma; need at least 4"
        )

    def slope(points):
        if len(points) < 2:
            return math.nan
        x = np.log([d for d, _ in points])
        y = np.log([g for _, g in points])
        return float(np.polyfit(x, y, 1)[0])

    pooled = sides[+1] + sides[-1]
    return QuadraticFit(
        pooled_slope=slope(pooled),
        slope_above=slope(sides[+1]),
        slope_below=slope(sides[-1]),
        offsets=tuple(offsets),
        gammas_above=tuple(g for _, g in sides[+1]),
        gammas_below=tuple(g for _, g in sides[-1]),
    )
