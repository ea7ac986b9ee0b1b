"""Exact cubic curve models y^2 = x^3 + a2 x^2 + a4 x + a6 over Q, the
chord-tangent group law, integral rescaling, and point counts over F_p.

Models are immutable values; reductions at distinct primes share no state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .numtheory import factorize

__all__ = [
    "SingularCurveError",
    "PointNotOnCurve",
    "BadReduction",
    "CubicModel",
    "IntegralModel",
    "RationalPoint",
    "INFINITY",
    "discriminant",
    "is_on_curve",
    "negate",
    "add_points",
    "scalar_multiply",
    "rescale",
    "integral_model",
    "reduce_mod_p",
    "trace_ap",
    "FpCurveSummary",
]


class SingularCurveError(ValueError):
    """Constructing a model whose discriminant vanishes."""


class PointNotOnCurve(ValueError):
    """A point handed to the group law does not satisfy the curve equation."""


class BadReduction(ValueError):
    """Reduction mod p requested at a prime dividing the discriminant."""

    def __init__(self, p: int):
        super().__init__(f"bad reduction at p = {p}")
        self.p = p


def _cubic_disc(a2, a4, a6):
    # discriminant of x^3 + a2 x^2 + a4 x + a6
    return (
        18 * a2 * a4 * a6
        - 4 * a2**3 * a6
        + a2**2 * a4**2
        - 4 * a4**3
        - 27 * a6**2
    )


@dataclass(frozen=True)
class CubicModel:
    """y^2 = x^3 + a2 x^2 + a4 x + a6 with exact rational coefficients."""

    a2: Fraction
    a4: Fraction
    a6: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a2", Fraction(self.a2))
        object.__setattr__(self, "a4", Fraction(self.a4))
        object.__setattr__(self, "a6", Fraction(self.a6))
        if _cubic_disc(self.a2, self.a4, self.a6) == 0:
            raise SingularCurveError(
                f"singular cubic: a2={self.a2}, a4={self.a4}, a6={self.a6}"
            )

    def rhs(self, x: Fraction) -> Fraction:
        return ((x + self.a2) * x + self.a4) * x + self.a6

    def coefficients(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.a2, self.a4, self.a6)

    def __str__(self):
        return f"y^2 = x^3 + ({self.a2})*x^2 + ({self.a4})*x + ({self.a6})"


@dataclass(frozen=True)
class IntegralModel:
    """Integer-coefficient model produced from a CubicModel by
    (x, y) -> (u^2 x, u^3 y); `u` records the scale."""

    a2: int
    a4: int
    a6: int
    u: int

    def __post_init__(self):
        for name in ("a2", "a4", "a6", "u"):
            v = getattr(self, name)
            if isinstance(v, Fraction):
                if v.denominator != 1:
                    raise ValueError(f"{name} = {v} is not integral")
                object.__setattr__(self, name, int(v))
        if self.u < 1:
            raise ValueError("scale u must be a positive integer")
        if _cubic_disc(self.a2, self.a4, self.a6) == 0:
            raise SingularCurveError("singular integral model")

    def as_cubic(self) -> CubicModel:
        return CubicModel(Fraction(self.a2), Fraction(self.a4), Fraction(self.a6))

    def source_model(self) -> CubicModel:
        """Invert the scaling substitution exactly."""
        u = self.u
        return CubicModel(
            Fraction(self.a2, u**2), Fraction(self.a4, u**4), Fraction(self.a6, u**6)
        )

    def rhs(self, x):
        return ((x + self.a2) * x + self.a4) * x + self.a6

    def coefficients(self) -> tuple[int, int, int]:
        return (self.a2, self.a4, self.a6)

    def map_point_in(self, point: "RationalPoint") -> "RationalPoint":
        """Carry a point of the source model onto this model."""
        if point.is_infinity:
            return INFINITY
        u = self.u
        return RationalPoint(point.x * u**2, point.y * u**3)

    def map_point_out(self, point: "RationalPoint") -> "RationalPoint":
        if point.is_infinity:
            return INFINITY
        u = self.u
        return RationalPoint(point.x / u**2, point.y / u**3)

    def __str__(self):
        return f"y^2 = x^3 + {self.a2}*x^2 + {self.a4}*x + {self.a6}   (u = {self.u})"


Model = Union[CubicModel, IntegralModel]


@dataclass(frozen=True)
class RationalPoint:
    """Affine point (x, y) with exact rational coordinates, or infinity."""

    x: Optional[Fraction] = None
    y: Optional[Fraction] = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("both coordinates or neither")
        if self.x is not None:
            object.__setattr__(self, "x", Fraction(self.x))
            object.__setattr__(self, "y", Fraction(self.y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __str__(self):
        if self.is_infinity:
            return "infinity"
        return f"({self.x}, {self.y})"


INFINITY = RationalPoint()


def discriminant(model: Model):
    """Curve discriminant: 16 times the cubic's polynomial discriminant.

    Zero never occurs for constructed models (checked at build time), but
    the formula is exposed for raw coefficient triples as well.
    """
    return 16 * _cubic_disc(model.a2, model.a4, model.a6)


def is_on_curve(model: Model, point: RationalPoint) -> bool:
    if point.is_infinity:
        return True
    return point.y * point.y == model.rhs(point.x)


def _require_on_curve(model: Model, point: RationalPoint):
    if not is_on_curve(model, point):
        raise PointNotOnCurve(f"{point} is not on {model}")


def negate(point: RationalPoint) -> RationalPoint:
    if point.is_infinity:
        return INFINITY
    return RationalPoint(point.x, -point.y)


def add_points(model: Model, p: RationalPoint, q: RationalPoint) -> RationalPoint:
    """Chord-tangent sum with infinity as identity."""
    _require_on_curve(model, p)
    _require_on_curve(model, q)
    if p.is_infinity:
        return q
    if q.is_infinity:
        return p
    a2 = Fraction(model.a2)
    if p.x == q.x:
        if p.y == -q.y:
            return INFINITY
        # doubling (y != 0 since the point is not 2-torsion here)
        slope = (3 * p.x * p.x + 2 * a2 * p.x + Fraction(model.a4)) / (2 * p.y)
    else:
        slope = (q.y - p.y) / (q.x - p.x)
    x3 = slope * slope - a2 - p.x - q.x
    y3 = slope * (p.x - x3) - p.y
    return RationalPoint(x3, y3)


def scalar_multiply(model: Model, n: int, point: RationalPoint) -> RationalPoint:
    """n-fold sum by double-and-add; negative n multiplies the inverse."""
    _require_on_curve(model, point)
    if n < 0:
        n, point = -n, negate(point)
    result = INFINITY
    addend = point
    while n:
        if n & 1:
            result = add_points(model, result, addend)
        n >>= 1
        if n:
            addend = add_points(model, addend, addend)
    return result


def rescale(model: CubicModel, u: int) -> CubicModel:
    """The model carrying (x, y) |-> (u^2 x, u^3 y)."""
    return CubicModel(model.a2 * u**2, model.a4 * u**4, model.a6 * u**6)


def integral_model(model: CubicModel, scale: Optional[int] = None) -> IntegralModel:
    """Integral rescaling of `model`.

    With `scale` given, that u is used (its scaled coefficients must be
    integral).  Otherwise the minimal positive u is computed from the prime
    factorization of the coefficient denominators: u needs p-exponent
    ceil(e2/2), ceil(e4/4), ceil(e6/6) for denominators p^e2, p^e4, p^e6.
    """
    if scale is None:
        need: dict[int, int] = {}
        for coeff, power in ((model.a2, 2), (model.a4, 4), (model.a6, 6)):
            den = coeff.denominator
            if den == 1:
                continue
            for prime, exp in factorize(den).factors:
                want = -(-exp // power)  # ceil
                if need.get(prime, 0) < want:
                    need[prime] = want
        scale = 1
        for prime, exp in need.items():
            scale *= prime**exp
    scaled = rescale(model, scale)
    for c in scaled.coefficients():
        if c.denominator != 1:
            raise ValueError(f"scale u = {scale} does not clear denominators")
    return IntegralModel(int(scaled.a2), int(scaled.a4), int(scaled.a6), scale)


@dataclass(frozen=True)
class FpCurveSummary:
    """Reduction of an integral model at a good prime."""

    p: int
    a2: int
    a4: int
    a6: int
    order: int
    trace: int


def _count_points(p: int, a2: int, a4: int, a6: int) -> int:
    """|E(F_p)| by the quadratic character sum
    1 + sum_x (1 + chi(f(x))), chi(0) = 0, via a residue table."""
    x = np.arange(p, dtype=np.int64)
    sq = np.zeros(p, dtype=bool)
    sq[(x * x) % p] = True
    f = (x + a2) % p
    f = (f * x + a4) % p
    f = (f * x + a6) % p
    zero = f == 0
    affine = int(zero.sum()) + 2 * int((sq[f] & ~zero).sum())
    return affine + 1


def reduce_mod_p(model: IntegralModel, p: int) -> FpCurveSummary:
    """Point count of the reduced curve at a good prime p.

    Raises BadReduction when p divides the discriminant (p = 2 always does:
    the discriminant carries the factor 16).
    """
    delta = discriminant(model)
    if delta % p == 0:
        raise BadReduction(p)
    if p >= 1 << 31:
        raise ValueError("point counting is O(p); p out of supported range")
    a2, a4, a6 = model.a2 % p, model.a4 % p, model.a6 % p
    order = _count_points(p, a2, a4, a6)
    trace = p + 1 - order
    assert trace * trace <= 4 * p, "Hasse bound violated; counting bug"
    return FpCurveSummary(p, a2, a4, a6, order, trace)


def trace_ap(model: IntegralModel, p: int) -> int:
    """Frobenius trace a_p = p + 1 - |E(F_p)| at a good prime."""
    return reduce_mod_p(model, p).trace
