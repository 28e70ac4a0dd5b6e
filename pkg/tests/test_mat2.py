"""Tests for the 2x2 matrix algebra, classification, and projective action."""

import math

import numpy as np
import pytest

from dimerlab.mat2 import (
    Direction,
    Kind,
    Mat2,
    NotUnimodular,
    Singular,
    act,
    classify,
    one_step_transfer,
    power_trace_check,
    two_step_transfer,
)

SQRT2 = math.sqrt(2.0)


def entries_close(m: Mat2, expected, tol=1e-12):
    return all(
        abs(got - want) <= tol for got, want in zip(m.entries(), expected)
    )


class TestOneStepTransfer:
    @pytest.mark.parametrize(
        "E, v, expected",
        [
            (1.0, 0.0, (1.0, -1.0, 1.0, 0.0)),
            (0.7, 0.7, (0.0, -1.0, 1.0, 0.0)),  # E = v
            (0.0, SQRT2, (-SQRT2, -1.0, 1.0, 0.0)),
        ],
    )
    def test_entries(self, E, v, expected):
        assert entries_close(one_step_transfer(E, v), expected, tol=0.0)

    def test_unit_determinant_random(self):
        rng = np.random.default_rng(0)
        for E, v in rng.uniform(-5.0, 5.0, size=(10_000, 2)):
            assert abs(one_step_transfer(E, v).det() - 1.0) <= 1e-14


class TestTwoStepTransfer:
    def test_resonance_is_minus_identity(self):
        for V in (0.3, 0.5, 1.0, 2.0):
            assert entries_close(
                two_step_transfer(V, V), (-1.0, 0.0, 0.0, -1.0), tol=0.0
            )

    def test_opposite_sign_dimer(self):
        V = 0.8
        m = two_step_transfer(V, -V)
        assert entries_close(m, (4 * V * V - 1.0, -2 * V, 2 * V, -1.0))

    def test_square_root_two_couple(self):
        # at E=0, v=+-sqrt(2) the two-step matrix squares to -Id
        for v in (SQRT2, -SQRT2):
            m = two_step_transfer(0.0, v)
            assert entries_close(m @ m, (-1.0, 0.0, 0.0, -1.0), tol=1e-15)

    def test_equals_one_step_squared(self):
        rng = np.random.default_rng(1)
        for E, v in rng.uniform(-5.0, 5.0, size=(10_000, 2)):
            s = one_step_transfer(E, v)
            assert entries_close(two_step_transfer(E, v), (s @ s).entries(), 1e-13)


class TestClassify:
    @pytest.mark.parametrize(
        "E, v, kind, radius",
        [
            (1.0, -1.0, Kind.PARABOLIC, 1.0),
            (2.0, -2.0, Kind.HYPERBOLIC, 7.0 + 4.0 * math.sqrt(3.0)),
            (0.5, -0.5, Kind.ELLIPTIC, 1.0),
        ],
    )
    def test_trichotomy_examples(self, E, v, kind, radius):
        sc = classify(two_step_transfer(E, v))
        assert sc.kind is kind
        assert sc.spectral_radius == pytest.approx(radius, abs=1e-12)

    def test_rejects_non_unimodular(self):
        with pytest.raises(NotUnimodular):
            classify(Mat2(2.0, 0.0, 0.0, 1.0))

    def test_sign_flip_invariance(self):
        rng = np.random.default_rng(2)
        for E, v in rng.uniform(-4.0, 4.0, size=(200, 2)):
            m = two_step_transfer(E, v)
            assert classify(m).kind is classify(-m).kind


class TestDirectionAndAct:
    def test_identity_fixes_every_direction(self):
        for theta in np.linspace(0.0, math.pi, 17, endpoint=False):
            out = act(Mat2.identity(), Direction(theta))
            assert out.isclose(Direction(theta))

    def test_minus_identity_fixes_every_direction(self):
        minus_id = Mat2(-1.0, 0.0, 0.0, -1.0)
        for theta in np.linspace(0.0, math.pi, 17, endpoint=False):
            assert act(minus_id, Direction(theta)).isclose(Direction(theta))

    def test_wraparound_distance(self):
        assert Direction(0.001).distance(Direction(math.pi - 0.001)) == pytest.approx(
            0.002, abs=1e-12
        )

    def test_singular_rejected(self):
        with pytest.raises(Singular):
            act(Mat2(1.0, 1.0, 1.0, 1.0), Direction(0.3))

    def test_parabolic_orbit_converges_to_fixed_direction(self):
        # alpha = 2 gives the parabolic two-step matrix [[3,-2],[2,-1]] whose
        # orbit on the projective line converges to the direction of (1, 1).
        m = two_step_transfer(2.0, 0.0)
        limit = Direction(math.pi / 4.0)
        # m^n = I + 2n[[1,-1],[1,-1]] stays exactly integer below 2^53, and
        # the orbit angle approaches pi/4 like 1/(4n)
        far = m.power(2**20)
        assert act(far, Direction(0.0)).isclose(limit, tol=1e-6)

    def test_homomorphism_property(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            m1 = two_step_transfer(*rng.uniform(-3.0, 3.0, 2))
            m2 = two_step_transfer(*rng.uniform(-3.0, 3.0, 2))
            x = Direction(rng.uniform(0.0, math.pi))
            lhs = act(m1 @ m2, x)
            rhs = act(m1, act(m2, x))
            assert lhs.distance(rhs) <= 1e-9

    def test_elliptic_has_no_fixed_direction(self):
        rng = np.random.default_rng(4)
        thetas = np.linspace(0.0, math.pi, 100, endpoint=False)
        for _ in range(1000):
            X = rng.uniform(0.3, 1.8)
            m = two_step_transfer(X, 0.0)
            assert classify(m).kind is Kind.ELLIPTIC
            residual = min(
                act(m, Direction(t)).distance(Direction(t)) for t in thetas
            )
            assert residual > 1e-3


class TestPowerAndNorm:
    def test_power_trace_polynomial(self):
        for X in (0.0, SQRT2, 2.0, -1.3, 0.77):
            assert power_trace_check(X) == pytest.approx(
                X**4 - 4.0 * X**2 + 2.0, abs=1e-12
            )

    def test_power_matches_repeated_multiplication(self):
        m = two_step_transfer(0.4, -0.9)
        direct = Mat2.identity()
        for _ in range(40):
            direct = m @ direct
        fast = m.power(40)
        assert entries_close(fast, direct.entries(), 1e-9 * direct.norm2())

    def test_negative_power_is_inverse_power(self):
        m = two_step_transfer(1.7, 0.2)
        prod = m.power(5) @ m.power(-5)
        assert entries_close(prod, (1.0, 0.0, 0.0, 1.0), 1e-9)

    def test_norm2_against_numpy(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            a, b, c, d = rng.normal(size=4)
            m = Mat2(a, b, c, d)
            ref = np.linalg.norm(np.array([[a, b], [c, d]]), 2)
            assert m.norm2() == pytest.approx(ref, rel=1e-10, abs=1e-12)

    def test_unimodular_inverse_is_exact(self):
        m = two_step_transfer(2.5, 0.3)
        inv = m.inverse()
        assert inv.entries() == (m.d, -m.b, -m.c, m.a)
