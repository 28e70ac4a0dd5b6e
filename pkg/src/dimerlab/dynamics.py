"""Finite-lattice spectral computation, time evolution, and localization fits.

A box of N sites (N even, so no dimer is cut) is diagonalized fully; the
spectral projector and the evolution operator then act through the
eigenbasis.  Position moments are measured from the physical origin at
x0 = N/2, a dimer head.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import DisorderRealization

AMPLITUDE_FLOOR = 1e-12


class ConvergenceFailure(RuntimeError):
    """Tridiagonal eigensolver did not converge."""


class DegenerateProfile(RuntimeError):
    """Eigenvector has too few above-floor sites for a decay fit."""


class NonPositiveValues(ValueError):
    """Growth-exponent fit window contains non-positive moment values."""


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column n is the eigenvector of eigenvalues[n]
    N: int
    x0: int


@dataclass(frozen=True)
class InitialState:
    kind: str  # "delta" or "exp"
    amplitudes: np.ndarray


@dataclass(frozen=True)
class MomentSeries:
    q: float
    interval: tuple[float, float]
    times: np.ndarray
    values: np.ndarray

    @property
    def sup_value(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    stderr: float


@dataclass(frozen=True)
class LocalizationProfile:
    index: int
    energy: float
    center: int
    decay_rate: float
    fit_r2: float
    degenerate: bool


def delta_state(N: int, x0: int | None = None) -> InitialState:
    x0 = N // 2 if x0 is None else x0
    amp = np.zeros(N, dtype=complex)
    amp[x0] = 1.0
    return InitialState("delta", amp)


def exponential_state(N: int, theta: float, x0: int | None = None) -> InitialState:
    """Normalized e^(-theta |x - x0|) with decay mass theta > 0."""
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    x0 = N // 2 if x0 is None else x0
    amp = np.exp(-theta * np.abs(np.arange(N) - x0)).astype(complex)
    amp /= np.linalg.norm(amp)
    return InitialState("exp", amp)


def diagonalize(w: DisorderRealization, N: int) -> SpectralData:
    """Full eigendecomposition of the Dirichlet box [0, N), N even."""
    if N < 4 or N % 2:
        raise ValueError(f"N must be even and >= 4, got {N}")
    diag = np.asarray(w.site_values(N), dtype=float)
    off = np.ones(N - 1)
    try:
        vals, vecs = eigh_tridiagonal(diag, off)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise ConvergenceFailure(str(exc)) from exc
    return SpectralData(eigenvalues=vals, eigenvectors=vecs, N=N, x0=N // 2)


def evolve(sd: SpectralData, psi0: np.ndarray, t: float) -> np.ndarray:
    """psi_t = sum_n e^(-i E_n t) <phi_n, psi0> phi_n."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    coeffs = sd.eigenvectors.T @ psi0
    return sd.eigenvectors @ (np.exp(-1j * sd.eigenvalues * t) * coeffs)


def project(sd: SpectralData, amplitudes: np.ndarray, interval) -> np.ndarray:
    """Spectral projection onto eigenvalues inside the closed interval."""
    lo, hi = interval
    keep = (sd.eigenvalues >= lo) & (sd.eigenvalues <= hi)
    coeffs = sd.eigenvectors.T @ amplitudes
    return sd.eigenvectors @ (keep * coeffs)


def moment(sd: SpectralData, psi0: InitialState, interval, q: float, t: float) -> float:
    """r^(q)(t) = sum_x |x - x0|^q |(P_I psi_t)(x)|^2."""
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    psi = project(sd, evolve(sd, psi0.amplitudes, t), interval)
    weights = np.abs(np.arange(sd.N) - sd.x0, dtype=float) ** q
    return float(weights @ np.abs(psi) ** 2)


def moment_series(
    sd: SpectralData, psi0: InitialState, interval, q: float, times
) -> MomentSeries:
    times = np.asarray(times, dtype=float)
    if times.size and not np.all(np.diff(times) > 0):
        raise ValueError("times must be strictly increasing")
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    weights = np.abs(np.arange(sd.N) - sd.x0, dtype=float) ** q
    projected = project(sd, psi0.amplitudes, interval)
    coeffs = sd.eigenvectors.T @ projected
    values = np.empty(times.size)
    for i, t in enumerate(times):
        psi = sd.eigenvectors @ (np.exp(-1j * sd.eigenvalues * t) * coeffs)
        values[i] = weights @ np.abs(psi) ** 2
    return MomentSeries(q=q, interval=(float(interval[0]), float(interval[1])),
                        times=times, values=values)


def fit_growth_exponent(series: MomentSeries, window: tuple[float, float]) -> GrowthFit:
    """Least-squares slope of ln r vs ln t over the time window."""
    lo, hi = window
    mask = (series.times >= lo) & (series.times <= hi)
    if mask.sum() < 8:
        raise ValueError(f"window [{lo}, {hi}] contains {int(mask.sum())} points, need >= 8")
    r = series.values[mask]
    if np.any(r <= 0):
        raise NonPositiveValues("moment values in window must be positive")
    x = np.log(series.times[mask])
    y = np.log(r)
    (slope, intercept), cov = np.polyfit(x, y, 1, cov=True)
    return GrowthFit(slope=float(slope), intercept=float(intercept),
                     stderr=float(math.sqrt(cov[0, 0])))


def _side_fit(logabs: np.ndarray, dist: np.ndarray):
    """Slope of log-amplitude vs distance and the fit's R^2, or None."""
    if dist.size < 2:
        return None
    slope, intercept = np.polyfit(dist, logabs, 1)
    pred = slope * dist + intercept
    ss_res = float(((logabs - pred) ** 2).sum())
    ss_tot = float(((logabs - logabs.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), r2, dist.size


def localization_profiles(
    sd: SpectralData, floor: float = AMPLITUDE_FLOOR
) -> list[LocalizationProfile]:
    """Per-eigenvector center and exponential decay rate from log-linear fits.

    The center is the leftmost maximal site; each side of it is fitted
    separately over sites above the amplitude floor and the slopes are
    averaged weighted by side length.  Vectors with fewer than 6 above-floor
    sites are flagged degenerate and carry no rate.
    """
    if not 0.0 < floor < 1.0:
        raise ValueError(f"floor must lie in (0,1), got {floor}")
    profiles = []
    for n in range(sd.N):
        phi = np.abs(sd.eigenvectors[:, n])
        center = int(np.argmax(phi))
        above = phi > floor
        if int(above.sum()) < 6:
            profiles.append(
                LocalizationProfile(n, float(sd.eigenvalues[n]), center,
                                    math.nan, math.nan, True)
            )
            continue
        x = np.arange(sd.N)
        fits = []
        for side_mask in (above & (x < center), above & (x > center)):
            xs = x[side_mask]
            fit = _side_fit(np.log(phi[side_mask]), np.abs(xs - center).astype(float))
            if fit is not None:
                fits.append(fit)
        if not fits:
            profiles.append(
                LocalizationProfile(n, float(sd.eigenvalues[n]), center,
                                    math.nan, math.nan, True)
            )
            continue
        total = sum(wt for _, _, wt in fits)
        rate = -sum(slope * wt for slope, _, wt in fits) / total
        r2 = sum(r * wt for _, r, wt in fits) / total
        profiles.append(
            LocalizationProfile(n, float(sd.eigenvalues[n]), center, rate, r2, False)
        )
    return profiles
