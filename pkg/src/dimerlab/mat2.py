"""2x2 real matrix algebra for transfer-matrix products.

Transfer matrices of the dimer chain are unimodular, so inverses are exact
and the elliptic/parabolic/hyperbolic trichotomy is decided by the trace
alone.  Directions (lines through the origin) carry the homography action
used in the Furstenberg-style orbit arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

# Parabolic matrices occur only at exact algebraic parameter values, so a
# tight trace band avoids misclassifying nearby elliptic/hyperbolic input.
TRACE_TOL = 1e-9
DET_TOL = 1e-9
DIRECTION_TOL = 1e-10
SINGULAR_TOL = 1e-12


class NotUnimodular(ValueError):
    """Determinant too far from 1 for a trace-based classification."""


class Singular(ValueError):
    """Matrix is numerically singular and cannot act on directions."""


class Kind(Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"


@dataclass(frozen=True)
class Mat2:
    """Row-major 2x2 real matrix [[a, b], [c, d]]. Immutable."""

    a: float
    b: float
    c: float
    d: float

    @staticmethod
    def identity() -> "Mat2":
        return Mat2(1.0, 0.0, 0.0, 1.0)

    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def trace(self) -> float:
        return self.a + self.d

    def entries(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "Mat2":
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def scale(self, s: float) -> "Mat2":
        return Mat2(s * self.a, s * self.b, s * self.c, s * self.d)

    def inverse(self) -> "Mat2":
        det = self.det()
        if abs(det) < SINGULAR_TOL:
            raise Singular(f"determinant {det} below {SINGULAR_TOL}")
        if abs(det - 1.0) <= 1e-12:
            # Unimodular inverse is exact: no division.
            return Mat2(self.d, -self.b, -self.c, self.a)
        return Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def power(self, n: int) -> "Mat2":
        """Integer matrix power; repeated squaring once the exponent is large."""
        if n < 0:
            return self.inverse().power(-n)
        if n <= 32:
            result = Mat2.identity()
            for _ in range(n):
                result = self @ result
            return result
        result = Mat2.identity()
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def norm2(self) -> float:
        """Operator 2-norm (largest singular value)."""
        e = self.a**2 + self.b**2 + self.c**2 + self.d**2
        det = self.det()
        disc = max(e * e - 4.0 * det * det, 0.0)
        return math.sqrt((e + math.sqrt(disc)) / 2.0)

    def mul_vec(self, x: float, y: float) -> tuple[float, float]:
        return (self.a * x + self.b * y, self.c * x + self.d * y)


@dataclass(frozen=True)
class SpectralClass:
    kind: Kind
    trace: float
    spectral_radius: float


@dataclass(frozen=True)
class Direction:
    """A line through the origin of R^2, stored as an angle in [0, pi)."""

    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", self.theta % math.pi)

    def distance(self, other: "Direction") -> float:
        d = abs(self.theta - other.theta) % math.pi
        return min(d, math.pi - d)

    def isclose(self, other: "Direction", tol: float = DIRECTION_TOL) -> bool:
        return self.distance(other) <= tol

    def vector(self) -> tuple[float, float]:
        return (math.cos(self.theta), math.sin(self.theta))


def one_step_transfer(E: float, v: float) -> Mat2:
    """Transfer matrix advancing (u(x+1), u(x)) by one lattice site."""
    return Mat2(E - v, -1.0, 1.0, 0.0)


def two_step_transfer(E: float, v: float) -> Mat2:
    """Transfer matrix across one dimer (two sites of equal potential)."""
    x = E - v
    return Mat2(x * x - 1.0, -x, x, -1.0)


def classify(m: Mat2, tol: float = TRACE_TOL) -> SpectralClass:
    """Elliptic/parabolic/hyperbolic trichotomy of a unimodular matrix."""
    det = m.det()
    if abs(det - 1.0) > DET_TOL:
        raise NotUnimodular(f"determinant {det} differs from 1 by more than {DET_TOL}")
    t = m.trace()
    at = abs(t)
    if at < 2.0 - tol:
        return SpectralClass(Kind.ELLIPTIC, t, 1.0)
    if at <= 2.0 + tol:
        return SpectralClass(Kind.PARABOLIC, t, 1.0)
    return SpectralClass(Kind.HYPERBOLIC, t, (at + math.sqrt(at * at - 4.0)) / 2.0)


def act(m: Mat2, x: Direction) -> Direction:
    """Homography action of a nonsingular matrix on the projective line."""
    if abs(m.det()) < SINGULAR_TOL:
        raise Singular(f"determinant {m.det()} below {SINGULAR_TOL}")
    w0, w1 = m.mul_vec(*x.vector())
    return Direction(math.atan2(w1, w0))


def power_trace_check(X: float) -> float:
    """tr(T_X^2) by explicit multiplication; equals X^4 - 4 X^2 + 2."""
    t = two_step_transfer(X, 0.0)
    return (t @ t).trace()
