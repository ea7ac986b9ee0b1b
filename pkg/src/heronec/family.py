"""The one-parameter Heron triple family and its elliptic curves.

For a rational parameter k the triple is

    a = 5k^2 - 4k + 4,   b = k(k^2 - 4k + 20)/2,   c = (k + 2)(k^2 - 4)/2,

and the attached curve is y^2 = (x + ab)(x + bc)(x + ac).  Three models are
kept: the product model above, the shifted model y^2 = x^3 + A x^2 + B x
(root -ac moved to 0), and an integral model at the canonical family scale
u = 2 q^3 for k = p/q in lowest terms (u = 2 for integer k, which is the
normalization the rank tables use).

The closed forms for A, B and the discriminant are evaluated literally AND
re-derived from the side products on every construction; any disagreement
raises ClosedFormMismatch instead of propagating a typo silently.

Parameters k in {0, 2, -2} make the curve degenerate and are rejected with
SingularParameter.  Parameters whose triple is not a geometric triangle
(some side <= 0) are admitted; the `geometric` flag records the distinction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .curves import (
    CubicModel,
    IntegralModel,
    RationalPoint,
    discriminant,
    integral_model,
    is_on_curve,
)
from .numtheory import is_rational_square

__all__ = [
    "SingularParameter",
    "NotASquare",
    "ClosedFormMismatch",
    "HeronTriple",
    "FamilyCurve",
    "SINGULAR_PARAMETERS",
    "SIDE_COINCIDENCE_POLYNOMIALS",
    "heron_sides",
    "heron_area",
    "product_model",
    "shifted_model",
    "family_discriminant",
    "base_point",
    "side_coincidence",
    "right_triangle_relation",
    "family_curve",
]


class SingularParameter(ValueError):
    """k in {0, 2, -2}: the curve degenerates."""

    def __init__(self, k):
        super().__init__(f"singular parameter k = {k}")
        self.k = k


class NotASquare(ArithmeticError):
    """The Heron product failed to be a rational square (diagnostic; the
    family identity area^2 = k^2 (k^2-4)^4 makes this unreachable)."""


class ClosedFormMismatch(AssertionError):
    """A literal closed form disagreed with its structural derivation."""


SINGULAR_PARAMETERS = (Fraction(0), Fraction(2), Fraction(-2))

# Side-coincidence conditions as integer polynomials in k (ascending
# coefficients): a=b, a=c, b=c.  Note a=c is k^3 - 8k^2 + 4k - 16 (no
# rational root), and b=c has only irrational roots 2 +- (4/3) sqrt 3.
SIDE_COINCIDENCE_POLYNOMIALS = {
    "a=b": (-8, 28, -14, 1),
    "a=c": (-16, 4, -8, 1),
    "b=c": (-4, -12, 3),
}


@dataclass(frozen=True)
class HeronTriple:
    k: Fraction
    a: Fraction
    b: Fraction
    c: Fraction
    semiperimeter: Fraction
    squared_area: Fraction
    geometric: bool


def _check_admissible(k: Fraction) -> Fraction:
    k = Fraction(k)
    if k in SINGULAR_PARAMETERS:
        raise SingularParameter(k)
    return k


def _sides_raw(k: Fraction) -> tuple[Fraction, Fraction, Fraction]:
    a = 5 * k * k - 4 * k + 4
    b = Fraction(1, 2) * k * (k * k - 4 * k + 20)
    c = Fraction(1, 2) * (k + 2) * (k * k - 4)
    return a, b, c


def heron_sides(k) -> HeronTriple:
    """The family triple at an admissible parameter k."""
    k = _check_admissible(k)
    a, b, c = _sides_raw(k)
    perim_half = (a + b + c) / 2
    squared_area = perim_half * (perim_half - a) * (perim_half - b) * (perim_half - c)
    geometric = (
        a > 0 and b > 0 and c > 0 and a < b + c and b < a + c and c < a + b
    )
    return HeronTriple(k, a, b, c, perim_half, squared_area, geometric)


def heron_area(k) -> Fraction:
    """Nonnegative rational square root of the Heron product."""
    triple = heron_sides(k)
    ok, root = is_rational_square(triple.squared_area)
    if not ok:
        raise NotASquare(
            f"squared area {triple.squared_area} at k = {k} is not a rational square"
        )
    return root


def product_model(k) -> CubicModel:
    """y^2 = (x + ab)(x + bc)(x + ac), expanded exactly."""
    k = _check_admissible(k)
    a, b, c = _sides_raw(k)
    r1, r2, r3 = a * b, b * c, a * c
    return CubicModel(r1 + r2 + r3, r1 * r2 + r1 * r3 + r2 * r3, r1 * r2 * r3)


def _shift_coefficients(k: Fraction) -> tuple[Fraction, Fraction]:
    """A, B from the side products: translate the product model so the
    root -ac lands at 0."""
    a, b, c = _sides_raw(k)
    return a * b + b * c - 2 * a * c, (a * b - a * c) * (b * c - a * c)


def _closed_form_A(k: Fraction) -> Fraction:
    return (
        Fraction(1, 4) * k**6
        - 3 * k**5
        - 16 * k**4
        + 96 * k**3
        - 44 * k**2
        - 16 * k
        + 32
    )


def _closed_form_B(k: Fraction) -> Fraction:
    f1 = k**6 - 12 * k**5 - 4 * k**4 + 96 * k**3 - 16 * k**2 - 192 * k + 64
    f2 = 15 * k**4 - 72 * k**3 + 40 * k**2 - 32 * k - 16
    return Fraction(-1, 4) * f1 * f2


def shifted_model(k) -> CubicModel:
    """y^2 = x^3 + A x^2 + B x, with A, B computed both ways and compared."""
    k = _check_admissible(k)
    a_shift, b_shift = _shift_coefficients(k)
    a_closed, b_closed = _closed_form_A(k), _closed_form_B(k)
    if (a_shift, b_shift) != (a_closed, b_closed):
        raise ClosedFormMismatch(
            f"A/B closed forms disagree with translation at k = {k}: "
            f"({a_closed}, {b_closed}) vs ({a_shift}, {b_shift})"
        )
    return CubicModel(a_shift, b_shift, Fraction(0))


def family_discriminant(k) -> Fraction:
    """The factored discriminant closed form; zero exactly at k in {0, 2, -2}."""
    k = Fraction(k)
    return (
        Fraction(1, 16)
        * k**2
        * (k**2 - 4 * k + 20) ** 2
        * (k**3 - 8 * k**2 + 4 * k - 16) ** 2
        * (k**2 - 12 * k + 4) ** 2
        * (k - 2) ** 4
        * (k + 2) ** 4
        * (5 * k**2 - 4 * k + 4) ** 2
        * (3 * k**2 - 12 * k - 4) ** 2
    )


def base_point(k) -> RationalPoint:
    """(0, abc) on the product model; membership is rechecked exactly."""
    k = _check_admissible(k)
    a, b, c = _sides_raw(k)
    point = RationalPoint(Fraction(0), a * b * c)
    model = product_model(k)
    if not is_on_curve(model, point):
        raise ClosedFormMismatch(f"base point {point} not on product model at k = {k}")
    return point


@dataclass(frozen=True)
class SideCoincidence:
    k: Fraction
    a_eq_b: bool
    a_eq_c: bool
    b_eq_c: bool

    @property
    def any(self) -> bool:
        return self.a_eq_b or self.a_eq_c or self.b_eq_c


def side_coincidence(k) -> SideCoincidence:
    """Which side equalities hold at k (defined for every k, even singular)."""
    k = Fraction(k)
    a, b, c = _sides_raw(k)
    return SideCoincidence(k, a == b, a == c, b == c)


_RIGHT_RELATIONS = (
    ("a^2 + b^2 = c^2", lambda a, b, c: a * a + b * b == c * c),
    ("a^2 + c^2 = b^2", lambda a, b, c: a * a + c * c == b * b),
    ("b^2 + c^2 = a^2", lambda a, b, c: b * b + c * c == a * a),
)


def right_triangle_relation(k) -> Optional[str]:
    """The Pythagorean relation the sides satisfy exactly, if any."""
    k = _check_admissible(k)
    a, b, c = _sides_raw(k)
    for label, holds in _RIGHT_RELATIONS:
        if holds(a, b, c):
            return label
    return None


@dataclass(frozen=True)
class FamilyCurve:
    k: Fraction
    triple: HeronTriple
    product_model: CubicModel
    shifted_model: CubicModel
    integral_model: IntegralModel
    base_point: RationalPoint


def family_curve(k) -> FamilyCurve:
    """Construct all three models plus the base point, cross-checking the
    closed forms and the discriminant identities on the way."""
    k = _check_admissible(k)
    triple = heron_sides(k)
    prod = product_model(k)
    shifted = shifted_model(k)
    delta = family_discriminant(k)

    b_coeff = shifted.a4
    a_coeff = shifted.a2
    delta_ab = 16 * b_coeff**2 * (a_coeff**2 - 4 * b_coeff)
    if not (delta == delta_ab == discriminant(prod) == discriminant(shifted)):
        raise ClosedFormMismatch(f"discriminant identities fail at k = {k}")

    scale = 2 * k.denominator**3
    integral = integral_model(prod, scale=scale)
    point = base_point(k)
    return FamilyCurve(k, triple, prod, shifted, integral, point)
