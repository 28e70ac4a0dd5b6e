"""Exact algebra and walk statistics at the two critical couples.

At (V=1/sqrt(2), E=-+3/sqrt(2)) the two transfer matrices reduce, in the
eigenbasis of the hyperbolic one, to diag(l1, l2) and an antidiagonal
involution; products collapse to +-T_beta^u T_alpha^W with integer u, W
driven by a correlated random walk.  At (V=sqrt(2), E=0) both matrices
square to -Id and pair-grouped products are powers of the hyperbolic
T_alpha T_beta with a simple i.i.d. increment law.  This module builds the
reduced matrices, performs the symbolic word reduction, and validates the
closed-form statistics by Monte Carlo.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .mat2 import Mat2, two_step_transfer
from .seeding import stream_rng

SQRT2 = math.sqrt(2.0)


class Couple(Enum):
    HALF_SQRT2 = "half-sqrt2"  # V = 1/sqrt(2), E = -+3/sqrt(2)
    SQRT2 = "sqrt2"  # V = sqrt(2), E = 0


class Letter(Enum):
    ALPHA = "alpha"  # potential value +V, probability 1-p
    BETA = "beta"  # potential value -V, probability p


@dataclass(frozen=True)
class CriticalCoupleAlgebra:
    couple: Couple
    E: float
    V: float
    alpha: float
    beta: float
    lambda1: float | None
    lambda2: float | None
    basis: np.ndarray | None  # columns are the eigendirections of the hyperbolic matrix
    T_alpha_reduced: Mat2
    T_beta_reduced: Mat2
    # The letter carrying diag(l1, l2); ALPHA at E<0, BETA at E>0 (roles of
    # alpha and beta exchange under E -> -E).  None for the SQRT2 couple.
    hyperbolic_letter: Letter | None = None

    def reduced(self, letter: Letter) -> Mat2:
        return self.T_alpha_reduced if letter is Letter.ALPHA else self.T_beta_reduced

    @property
    def involution_reduced(self) -> Mat2:
        other = (Letter.BETA if self.hyperbolic_letter is Letter.ALPHA
                 else Letter.ALPHA)
        return self.reduced(other)


@dataclass(frozen=True)
class ReducedWord:
    """Normal form +-(involution)^u (hyperbolic)^W of a word in the two matrices."""

    sign: int
    u: int
    W: int

    def reconstruct(
        self, algebra: CriticalCoupleAlgebra, log_scale: float = 0.0
    ) -> np.ndarray:
        """The matrix of the normal form, divided by exp(log_scale).

        Powers of lambda1 are taken in log space, so passing the log_scale of
        a renormalized direct product keeps every entry in range no matter
        how large |W| grows.
        """
        log_l1 = math.log(algebra.lambda1)
        m = np.diag([
            math.exp(self.W * log_l1 - log_scale),
            math.exp(-self.W * log_l1 - log_scale),
        ])
        if self.u:
            m = _as_array(algebra.involution_reduced) @ m
        return self.sign * m


@dataclass(frozen=True)
class PairedStat:
    empirical: float
    theoretical: float
    sigma: float

    def within(self, n_sigma: float = 3.0) -> bool:
        return abs(self.empirical - self.theoretical) <= n_sigma * self.sigma


@dataclass(frozen=True)
class WalkStats:
    couple: Couple
    p: float
    n_matrices: int
    n_trials: int
    stats: dict[str, PairedStat]

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema_version": 1,
                "couple": self.couple.value,
                "p": self.p,
                "n_matrices": self.n_matrices,
                "n_trials": self.n_trials,
                "stats": {
                    name: {
                        "empirical": s.empirical,
                        "theoretical": s.theoretical,
                        "sigma": s.sigma,
                    }
                    for name, s in self.stats.items()
                },
            },
            indent=2,
            sort_keys=True,
        )


def _as_array(m: Mat2) -> np.ndarray:
    return np.array([[m.a, m.b], [m.c, m.d]])


def build_algebra(couple: Couple, sign_of_E: int = -1) -> CriticalCoupleAlgebra:
    """Reduced transfer matrices at a critical couple.

    For HALF_SQRT2, sign_of_E selects E = sign * 3/sqrt(2); the eigenbasis
    (beta+eps, 1) of T_alpha is scaled so that the reduced T_beta is exactly
    [[0, 1-beta], [1+beta, 0]].
    """
    if couple is Couple.SQRT2:
        E, V = 0.0, SQRT2
        return CriticalCoupleAlgebra(
            couple=couple,
            E=E,
            V=V,
            alpha=E - V,
            beta=E + V,
            lambda1=None,
            lambda2=None,
            basis=None,
            T_alpha_reduced=two_step_transfer(E, V),
            T_beta_reduced=two_step_transfer(E, -V),
        )

    if sign_of_E not in (-1, +1):
        raise ValueError(f"sign_of_E must be -1 or +1, got {sign_of_E}")
    V = 1.0 / SQRT2
    E = sign_of_E * 3.0 / SQRT2
    alpha = E - V
    beta = E + V
    lambda1 = 3.0 + 2.0 * SQRT2
    lambda2 = 3.0 - 2.0 * SQRT2

    # At E<0: beta^2 = 2, alpha = 2*beta and T_alpha is hyperbolic.  At E>0
    # the roles exchange: alpha^2 = 2, beta = 2*alpha and T_beta is
    # hyperbolic.  Write y for the involution parameter (y^2 = 2); the
    # eigenvectors of the hyperbolic matrix are (y+eps, 1) with eigenvalue
    # 3 + 2*eps*y, the expanding one at eps = sign(y).
    if sign_of_E < 0:
        y = beta
        hyperbolic_letter = Letter.ALPHA
        t_inv = _as_array(two_step_transfer(E, -V))
    else:
        y = alpha
        hyperbolic_letter = Letter.BETA
        t_inv = _as_array(two_step_transfer(E, V))
    eps1 = 1.0 if y > 0 else -1.0
    basis = np.column_stack(([y + eps1, 1.0], [y - eps1, 1.0]))
    reduced_inv = np.linalg.solve(basis, t_inv @ basis)
    # Rescale the contracting eigenvector so the antidiagonal entries land on
    # (1-y, 1+y) exactly; (1-y)(1+y) = -1.
    basis = basis.copy()
    basis[:, 1] *= (1.0 - y) / reduced_inv[0, 1]
    hyperbolic = Mat2(lambda1, 0.0, 0.0, lambda2)
    involution = Mat2(0.0, 1.0 - y, 1.0 + y, 0.0)
    if hyperbolic_letter is Letter.ALPHA:
        t_alpha_reduced, t_beta_reduced = hyperbolic, involution
    else:
        t_alpha_reduced, t_beta_reduced = involution, hyperbolic
    return CriticalCoupleAlgebra(
        couple=couple,
        E=E,
        V=V,
        alpha=alpha,
        beta=beta,
        lambda1=lambda1,
        lambda2=lambda2,
        basis=basis,
        T_alpha_reduced=t_alpha_reduced,
        T_beta_reduced=t_beta_reduced,
        hyperbolic_letter=hyperbolic_letter,
    )


def reduce_word(word, algebra: CriticalCoupleAlgebra) -> ReducedWord:
    """Collapse a word to +-B^u H^W, H hyperbolic and B the involution.

    `word` is most-recent-first: word[0] is the leftmost (last applied)
    factor.  The reduction uses B H^n = H^(-n) B and B^2 = -Id, so
    left-multiplying by H adds (-1)^u to W and left-multiplying by B toggles
    u, flipping the sign on a full pair.
    """
    if algebra.couple is not Couple.HALF_SQRT2:
        raise ValueError("word reduction applies to the HALF_SQRT2 algebra")
    sign, u, w = 1, 0, 0
    for letter in reversed(list(word)):
        if letter not in (Letter.ALPHA, Letter.BETA):
            raise ValueError(f"unknown letter {letter!r}")
        if letter is algebra.hyperbolic_letter:
            w += 1 if u == 0 else -1
        else:
            if u == 0:
                u = 1
            else:
                u = 0
                sign = -sign
    return ReducedWord(sign=sign, u=u, W=w)


def word_product(word, algebra: CriticalCoupleAlgebra) -> tuple[np.ndarray, float]:
    """Direct product of the reduced matrices over a most-recent-first word.

    Returns (M, log_scale) with the true product equal to M * exp(log_scale);
    per-step renormalization keeps the entries in range for long words.
    """
    mats = {
        Letter.ALPHA: algebra.T_alpha_reduced.entries(),
        Letter.BETA: algebra.T_beta_reduced.entries(),
    }
    m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
    log_scale = 0.0
    for letter in reversed(list(word)):
        a, b, c, d = mats[letter]
        m00, m01, m10, m11 = (
            a * m00 + b * m10,
            a * m01 + b * m11,
            c * m00 + d * m10,
            c * m01 + d * m11,
        )
        f = max(abs(m00), abs(m01), abs(m10), abs(m11))
        m00, m01, m10, m11 = m00 / f, m01 / f, m10 / f, m11 / f
        log_scale += math.log(f)
    return np.array([[m00, m01], [m10, m11]]), log_scale


def check_norm_bound(algebra: CriticalCoupleAlgebra, word) -> tuple[float, float]:
    """(lhs, rhs) of ln||product|| <= |W| ln(lambda1) + ln||involution||."""
    if not word:
        raise ValueError("word must be nonempty")
    m, log_scale = word_product(word, algebra)
    lhs = log_scale + math.log(np.linalg.norm(m, 2))
    reduced = reduce_word(word, algebra)
    rhs = abs(reduced.W) * math.log(algebra.lambda1) + math.log(
        algebra.involution_reduced.norm2()
    )
    return lhs, rhs


def epsilon_law(p: float) -> tuple[float, float, float]:
    """(P(eps=+1), P(eps=-1), E(eps)) for the parity of beta-runs."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")
    return 1.0 / (1.0 + p), p / (1.0 + p), (1.0 - p) / (1.0 + p)


def u_law(p: float, k: int) -> tuple[float, float]:
    """(P(U_k=+1), P(U_k=-1)) for the product U_k = eps_1 ... eps_k."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    bias = ((1.0 - p) / (1.0 + p)) ** k
    return 0.5 * (1.0 + bias), 0.5 * (1.0 - bias)


def walk_path(bits: np.ndarray):
    """Per-step walk quantities of one raw matrix string.

    bits is boolean in application order, True where the matrix is T_beta.
    Returns (eps, U, W_path, m): the run-parity signs eps_k between
    consecutive T_alpha's, their running products U_k, the partial sums
    W_k = U_1 + ... + U_k, and the T_alpha count m.
    """
    bits = np.asarray(bits, dtype=bool)
    pos = np.flatnonzero(~bits)
    m = pos.size
    if m == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty, 0
    gaps = np.empty(m, dtype=np.int64)
    # Betas strictly after the k-th alpha, up to the next alpha (or the end).
    gaps[:-1] = np.diff(pos) - 1
    gaps[-1] = bits.size - pos[-1] - 1
    eps = 1 - 2 * (gaps & 1)
    U = np.cumprod(eps)
    return eps, U, np.cumsum(U), m


def _pair_walk_increments(bits: np.ndarray) -> np.ndarray:
    """Increment of the (T_alpha T_beta)-power per matrix pair (SQRT2 case)."""
    n_pairs = bits.size // 2
    earlier = bits[: 2 * n_pairs : 2]
    later = bits[1 : 2 * n_pairs : 2]
    return (~later & earlier).astype(np.int64) - (later & ~earlier).astype(np.int64)


def exact_gamma_estimate(
    couple: Couple, p: float, n_matrices: int, n_trials: int, seed: int
) -> float:
    """Lyapunov estimate at a critical couple from the exact integer walk.

    Tracks the residual power W of the expanding factor symbolically, so the
    cancellation that drives gamma to zero is exact instead of being floored
    at machine precision; the estimate is ln(l1) * E|W| / n, which decays
    like 1/sqrt(n).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")
    log_l1 = math.log(3.0 + 2.0 * SQRT2)  # also rho(T_alpha T_beta) at SQRT2
    total = 0.0
    for t in range(n_trials):
        bits = stream_rng(seed, t).random(n_matrices) < p
        if couple is Couple.HALF_SQRT2:
            _, _, w_path, m = walk_path(bits)
            w = int(w_path[-1]) if m else 0
        else:
            w = int(_pair_walk_increments(bits).sum())
        total += abs(w)
    return log_l1 * (total / n_trials) / n_matrices


def simulate_walk(
    couple: Couple, p: float, n_matrices: int, n_trials: int, seed: int
) -> WalkStats:
    """Empirical vs closed-form walk statistics over seeded trials.

    Each trial draws n_matrices letters (T_beta with probability p); the
    HALF_SQRT2 case tracks the eps/U/W recurrences (E<0 convention, where
    T_alpha is the hyperbolic letter), the SQRT2 case the pair-grouped power
    of T_alpha T_beta.
    """
    if n_matrices < 1000:
        raise ValueError(f"n_matrices must be >= 1000, got {n_matrices}")
    if n_trials < 100:
        raise ValueError(f"n_trials must be >= 100, got {n_trials}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")

    m_counts = np.empty(n_trials)
    if couple is Couple.HALF_SQRT2:
        u_ks = (1, 2, 5, 10)
        eps_pos = 0
        eps_tot = 0
        eps_sum = 0.0
        u_hits = {k: 0 for k in u_ks}
        w_finals = np.empty(n_trials)
        for t in range(n_trials):
            bits = stream_rng(seed, t).random(n_matrices) < p
            eps, U, w_path, m = walk_path(bits)
            m_counts[t] = m
            eps_pos += int((eps == 1).sum())
            eps_tot += m
            eps_sum += float(eps.sum())
            for k in u_ks:
                if m >= k and U[k - 1] == 1:
                    u_hits[k] += 1
            w_finals[t] = w_path[-1] if m else 0
        p_plus, _, eps_mean = epsilon_law(p)
        stats = {
            "eps_plus_prob": PairedStat(
                eps_pos / eps_tot,
                p_plus,
                math.sqrt(p_plus * (1 - p_plus) / eps_tot),
            ),
            "eps_mean": PairedStat(
                eps_sum / eps_tot,
                eps_mean,
                math.sqrt((1 - eps_mean**2) / eps_tot),
            ),
            # No closed form for E(W^2) in this case; reported for inspection.
            "w_sq_mean": PairedStat(
                float((w_finals**2).mean()),
                math.nan,
                float((w_finals**2).std(ddof=1) / math.sqrt(n_trials)),
            ),
        }
        for k in u_ks:
            q, _ = u_law(p, k)
            stats[f"u_plus_prob_k{k}"] = PairedStat(
                u_hits[k] / n_trials, q, math.sqrt(q * (1 - q) / n_trials)
            )
    else:
        w_finals = np.empty(n_trials)
        for t in range(n_trials):
            bits = stream_rng(seed, t).random(n_matrices) < p
            m_counts[t] = int((~bits).sum())
            w_finals[t] = int(_pair_walk_increments(bits).sum())
        n_pairs = n_matrices // 2
        wsq = w_finals**2
        stats = {
            "w_sq_mean": PairedStat(
                float(wsq.mean()),
                2.0 * n_pairs * p * (1.0 - p),
                float(wsq.std(ddof=1) / math.sqrt(n_trials)),
            )
        }

    centered = m_counts - m_counts.mean()
    var_emp = float((centered**2).sum() / (n_trials - 1))
    mu4 = float((centered**4).mean())
    stats["m_mean"] = PairedStat(
        float(m_counts.mean()),
        (1.0 - p) * n_matrices,
        float(m_counts.std(ddof=1) / math.sqrt(n_trials)),
    )
    stats["m_var"] = PairedStat(
        var_emp,
        p * (1.0 - p) * n_matrices,
        math.sqrt(max(mu4 - var_emp**2, 0.0) / n_trials),
    )
    return WalkStats(
        couple=couple, p=p, n_matrices=n_matrices, n_trials=n_trials, stats=stats
    )
