"""Tests for Lyapunov estimation and the exact criticality classifier."""

import math

import numpy as np
import pytest

from dimerlab.lyapunov import (
    Verdict,
    classify_criticality,
    estimate_gamma,
    fit_quadratic_vanishing,
    log_norm_series,
    scan_gamma,
)
from dimerlab.mat2 import Kind, Mat2, two_step_transfer
from dimerlab.model import DimerParams
from dimerlab.seeding import stream_rng

SQRT2 = math.sqrt(2.0)


class TestEstimateGamma:
    def test_validation(self):
        params = DimerParams(1.0, 0.5)
        with pytest.raises(ValueError):
            estimate_gamma(params, 0.0, 0, 1, 0)
        with pytest.raises(ValueError):
            estimate_gamma(params, 0.0, 100, 0, 0)

    def test_per_site_normalization(self):
        est = estimate_gamma(DimerParams(1.0, 0.5), 0.3, 2000, 2, 0)
        assert est.gamma_per_site == est.gamma_per_dimer / 2.0
        assert est.std_error >= 0.0

    def test_single_realization_has_zero_stderr(self):
        est = estimate_gamma(DimerParams(1.0, 0.5), 0.3, 2000, 1, 0)
        assert est.std_error == 0.0

    def test_accumulation_telescopes_to_product_norm(self):
        # Sum of per-step log growths equals the log norm of the full
        # product applied to the initial vector, exactly up to rounding.
        params = DimerParams(0.9, 0.4)
        E = 0.3
        n = 40
        bits = stream_rng(21, 0).random(n) < params.p
        est = estimate_gamma(params, E, n, 1, 21)
        w = np.array([1.0, 0.0])
        plus = two_step_transfer(E, params.V)
        minus = two_step_transfer(E, -params.V)
        for b in bits:
            m = minus if b else plus
            w = np.array(m.mul_vec(w[0], w[1]))
        assert est.gamma_per_dimer * n == pytest.approx(
            math.log(np.linalg.norm(w)), abs=1e-10
        )

    def test_initial_direction_independence(self):
        params = DimerParams(1.0, 0.5)
        a = estimate_gamma(params, 0.4, 50_000, 8, 13, initial=(1.0, 0.0))
        b = estimate_gamma(params, 0.4, 50_000, 8, 13, initial=(0.0, 1.0))
        comb = math.hypot(a.std_error, b.std_error)
        assert abs(a.gamma_per_dimer - b.gamma_per_dimer) <= max(3 * comb, 1e-3)

    def test_flip_symmetry(self):
        # v -> -v together with E -> -E conjugates the transfer matrices, so
        # (p, E) and (1-p, -E) give the same exponent.
        a = estimate_gamma(DimerParams(0.8, 0.3), 0.7, 100_000, 16, 4)
        b = estimate_gamma(DimerParams(0.8, 0.7), -0.7, 100_000, 16, 4)
        comb = math.hypot(a.std_error, b.std_error)
        assert abs(a.gamma_per_dimer - b.gamma_per_dimer) <= max(3 * comb, 1e-4)

    def test_bounded_product_at_resonance(self):
        # At E = V < 1 the matrix product stays bounded; the running max of
        # ln||T_n ... T_1|| is reached early and never exceeded.
        for seed in (0, 1, 2):
            series = log_norm_series(DimerParams(0.5, 0.5), 0.5, 100_000, seed,
                                     stride=100)
            assert series.max() <= series[:200].max() + 1e-9
            assert series.max() < 5.0


class TestScanGamma:
    def test_singleton_matches_estimate(self):
        params = DimerParams(1.0, 0.5)
        single = scan_gamma(params, [0.7], 5000, 3, 17)[0]
        direct = estimate_gamma(params, 0.7, 5000, 3, 17)
        assert single.gamma_per_dimer == direct.gamma_per_dimer
        assert single.std_error == direct.std_error

    def test_grid_validation(self):
        params = DimerParams(1.0, 0.5)
        with pytest.raises(ValueError):
            scan_gamma(params, [], 1000, 1, 0)
        with pytest.raises(ValueError):
            scan_gamma(params, [1.0, 0.5], 1000, 1, 0)

    def test_positive_away_from_resonance(self):
        params = DimerParams(0.5, 0.5)
        grid = [E for E in np.linspace(-2.5, 2.5, 101)
                if min(abs(E - 0.5), abs(E + 0.5)) > 0.05]
        for est in scan_gamma(params, np.array(grid), 20_000, 4, 23):
            assert est.gamma_per_dimer > 0.0


class TestClassifierEstimatorAgreement:
    @pytest.mark.parametrize("V", [0.5, 1.0 / SQRT2, 1.0, SQRT2, 2.0])
    def test_grid_agreement(self, V):
        """Verdicts and Monte Carlo estimates tell the same story on a grid.

        PositiveExponent energies more than 0.05 away from any critical
        energy must have gamma-hat > 3 std errors; resonance-critical grid
        points must sit below the 5e-3 absolute threshold.  Walk-critical
        points are excluded here: their float estimate saturates at machine
        precision and is covered by the sqrt(n)-scaling check instead.
        """
        from dimerlab.model import DimerParams, almost_sure_spectrum

        params = DimerParams(V, 0.5)
        lo, hi = almost_sure_spectrum(params).hull
        grid = np.linspace(lo, hi, 201)
        critical = [
            E for E in (-V, V, -3.0 / SQRT2, 3.0 / SQRT2, 0.0)
            if classify_criticality(params, E).verdict
            is not Verdict.POSITIVE_EXPONENT
        ]
        for est in scan_gamma(params, grid, 50_000, 4, 3):
            verdict = classify_criticality(params, est.energy).verdict
            dist = min((abs(est.energy - c) for c in critical),
                       default=math.inf)
            if verdict is Verdict.POSITIVE_EXPONENT and dist > 0.05:
                assert est.gamma_per_dimer > 3.0 * est.std_error, est
            elif verdict is Verdict.RESONANCE_CRITICAL:
                assert abs(est.gamma_per_dimer) <= 5e-3, est


class TestClassifyCriticality:
    def test_resonance(self):
        for V in (0.3, 0.5, 1.0):
            for sign in (+1, -1):
                report = classify_criticality(DimerParams(V, 0.5), sign * V)
                assert report.verdict is Verdict.RESONANCE_CRITICAL
        # resonance condition fails above V = 1
        report = classify_criticality(DimerParams(2.0, 0.5), 2.0)
        assert report.verdict is Verdict.POSITIVE_EXPONENT

    def test_walk_critical_couples(self):
        report = classify_criticality(DimerParams(SQRT2 / 2, 0.5), -3 * SQRT2 / 2)
        assert report.verdict is Verdict.WALK_CRITICAL
        assert report.matched_condition == "beta^2=2, alpha=2*beta"
        assert report.alpha == pytest.approx(-2 * SQRT2)
        assert report.beta == pytest.approx(-SQRT2)

        report = classify_criticality(DimerParams(SQRT2 / 2, 0.5), 3 * SQRT2 / 2)
        assert report.verdict is Verdict.WALK_CRITICAL
        assert report.matched_condition == "alpha^2=2, beta=2*alpha"

        report = classify_criticality(DimerParams(SQRT2, 0.5), 0.0)
        assert report.verdict is Verdict.WALK_CRITICAL
        assert report.matched_condition == "alpha^2=2, beta^2=2"
        # trace alpha^2 - 2 = 0: both matrices are quarter-turn rotations
        assert report.class_alpha.kind is Kind.ELLIPTIC
        assert report.class_beta.kind is Kind.ELLIPTIC

    def test_generic_energy(self):
        report = classify_criticality(DimerParams(0.5, 0.5), 0.0)
        assert report.verdict is Verdict.POSITIVE_EXPONENT
        assert report.matched_condition == "none"


class TestQuadraticFit:
    def test_requires_resonance_center(self):
        with pytest.raises(ValueError, match="not resonance-critical"):
            fit_quadratic_vanishing(
                DimerParams(0.5, 0.5), 0.0, [0.02, 0.04, 0.08, 0.16], 1000, 2, 0
            )

    def test_rejects_nonpositive_offsets(self):
        with pytest.raises(ValueError, match="positive"):
            fit_quadratic_vanishing(
                DimerParams(0.5, 0.5), 0.5, [0.0, 0.1], 1000, 2, 0
            )

    def test_synthetic_power_law_slopes(self):
        # The fit itself is a plain log-log least-squares slope; feed it
        # synthetic power-law data through the same polyfit path.
        offsets = np.array([0.02, 0.04, 0.08, 0.16])
        for power in (1.0, 2.0):
            slope = float(
                np.polyfit(np.log(offsets), np.log(3.7 * offsets**power), 1)[0]
            )
            assert slope == pytest.approx(power, abs=1e-12)
