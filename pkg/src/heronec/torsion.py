"""Exact torsion subgroup computation and point order certification.

The strategy: a reduction bound (gcd of |E(F_p)| over good primes, which
the torsion order divides) caps the group; explicit searches then certify
the exact structure.  Order-2 points are the rational roots of the cubic;
order-4 and order-8 points come from halving quartics; odd orders 3, 5, 7,
9 from rational roots of division polynomials.  Rational torsion points
have order at most 12, so a point surviving 12 additions has infinite
order; that same cap makes every search exhaustive and the output provable.

Lutz-Nagell divisor enumeration is deliberately not used: the family's
discriminants are enormous while its torsion bound is tiny.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .curves import (
    INFINITY,
    IntegralModel,
    RationalPoint,
    add_points,
    discriminant,
    is_on_curve,
    PointNotOnCurve,
    reduce_mod_p,
)
from .numtheory import is_rational_square, iter_primes, rational_roots

__all__ = [
    "InsufficientGoodPrimes",
    "INFINITE_ORDER",
    "TorsionGroup",
    "two_torsion",
    "torsion_order_bound",
    "point_order",
    "torsion_subgroup",
]

INFINITE_ORDER = math.inf

# No rational torsion point has order above 12 (the 15 admissible groups).
_MAX_TORSION_ELEMENT_ORDER = 12
_MAX_TORSION_ORDER = 16


class InsufficientGoodPrimes(RuntimeError):
    """Could not collect enough good primes for the reduction bound."""


def two_torsion(model: IntegralModel) -> list[RationalPoint]:
    """All rational points (x, 0): x runs over rational roots of the cubic."""
    coeffs = [Fraction(model.a6), Fraction(model.a4), Fraction(model.a2), Fraction(1)]
    return [RationalPoint(x, Fraction(0)) for x in sorted(rational_roots(coeffs))]


def torsion_order_bound(model: IntegralModel, prime_budget: int = 10) -> int:
    """gcd of |E(F_p)| over good primes p > 2.

    At least `prime_budget` good primes are used, then more until the gcd
    has not moved for 3 consecutive primes.  The torsion order divides the
    returned value (reduction at a good odd prime is injective on torsion).
    """
    delta = discriminant(model)
    bound = 0
    used = 0
    stable = 0
    for p in iter_primes(3):
        if p > 10**7:
            raise InsufficientGoodPrimes(
                f"only {used} good primes below 10^7 (needed {prime_budget})"
            )
        if delta % p == 0:
            continue
        new = math.gcd(bound, reduce_mod_p(model, p).order)
        stable = stable + 1 if new == bound else 0
        bound = new
        used += 1
        if used >= prime_budget and stable >= 3:
            return bound
    raise AssertionError("unreachable")


def point_order(model, point: RationalPoint):
    """Least n <= 12 with n*P = infinity, else INFINITE_ORDER."""
    if not is_on_curve(model, point):
        raise PointNotOnCurve(f"{point} is not on {model}")
    acc = point
    for n in range(1, _MAX_TORSION_ELEMENT_ORDER + 1):
        if acc.is_infinity:
            return n
        acc = add_points(model, acc, point)
    return INFINITE_ORDER


# --------------------------------------------------------------------------
# division polynomials (coefficients ascending, exact Fractions)

def _pmul(f, g):
    out = [Fraction(0)] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return out


def _psub(f, g):
    n = max(len(f), len(g))
    return [
        (f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0) for i in range(n)
    ]


def _pscale(f, c):
    return [c * a for a in f]


def _odd_division_polynomials(model) -> dict[int, list[Fraction]]:
    """psi_n for odd n in {3,5,7,9} as polynomials in x (y eliminated)."""
    a2, a4, a6 = (Fraction(model.a2), Fraction(model.a4), Fraction(model.a6))
    f = [a6, a4, a2, Fraction(1)]
    b2, b4, b6 = 4 * a2, 2 * a4, 4 * a6
    b8 = 4 * a2 * a6 - a4 * a4

    p3 = [b8, 3 * b6, 3 * b4, b2, Fraction(3)]
    # psi_4 = 2y * t4
    t4 = [
        b4 * b8 - b6 * b6,
        b2 * b8 - b4 * b6,
        10 * b8,
        10 * b6,
        5 * b4,
        b2,
        Fraction(2),
    ]
    f2_16 = _pscale(_pmul(f, f), Fraction(16))
    p3_cubed = _pmul(_pmul(p3, p3), p3)
    p5 = _psub(_pmul(f2_16, t4), p3_cubed)
    t6 = _pmul(p3, _psub(p5, _pmul(t4, t4)))
    t4_cubed = _pmul(_pmul(t4, t4), t4)
    p7 = _psub(_pmul(p5, p3_cubed), _pmul(f2_16, t4_cubed))
    p5_cubed = _pmul(_pmul(p5, p5), p5)
    p9 = _psub(_pmul(f2_16, _pmul(t6, t4_cubed)), _pmul(p3, p5_cubed))
    return {3: p3, 5: p5, 7: p7, 9: p9}


def _points_at_x(model, x: Fraction) -> list[RationalPoint]:
    ok, y = is_rational_square(model.rhs(x))
    if not ok:
        return []
    if y == 0:
        return [RationalPoint(x, Fraction(0))]
    return [RationalPoint(x, y), RationalPoint(x, -y)]


def _halving_quartic(model, t: Fraction) -> list[Fraction]:
    """x-coordinates X with x(2X) = t are the roots of this quartic."""
    a2, a4, a6 = (Fraction(model.a2), Fraction(model.a4), Fraction(model.a6))
    return list(
        rational_roots(
            [
                a4 * a4 - 4 * a2 * a6 - 4 * a6 * t,
                -4 * a4 * t - 8 * a6,
                -4 * a2 * t - 2 * a4,
                -4 * t,
                Fraction(1),
            ]
        )
    )


@dataclass(frozen=True)
class TorsionGroup:
    """invariants (n,) for cyclic Z/n, (2, 2m) for the product forms;
    (1,) is the trivial group."""

    invariants: tuple[int, ...]
    order: int
    generators: tuple[RationalPoint, ...]

    def describe(self) -> str:
        if self.order == 1:
            return "trivial"
        if len(self.invariants) == 1:
            return f"Z/{self.invariants[0]}Z"
        return f"Z/{self.invariants[0]}Z x Z/{self.invariants[1]}Z"


def _closure(model, generators) -> set[RationalPoint]:
    group = {INFINITY}
    frontier = [INFINITY]
    for g in generators:
        if g in group:
            continue
        group.add(g)
        frontier.append(g)
    changed = True
    while changed:
        changed = False
        for a in list(group):
            for b in list(group):
                s = add_points(model, a, b)
                if s not in group:
                    group.add(s)
                    changed = True
                    if len(group) > _MAX_TORSION_ORDER:
                        raise AssertionError(
                            "torsion closure exceeded the Mazur cap; "
                            "a non-torsion point leaked into the generator set"
                        )
    return group


def torsion_subgroup(model: IntegralModel, prime_budget: int = 10) -> TorsionGroup:
    """The exact rational torsion subgroup.

    Combines the reduction bound with exhaustive prime-power searches:
    whatever structure the bound leaves possible is either found (rational
    roots exist) or refuted (they do not), so the answer is exact.
    """
    bound = torsion_order_bound(model, prime_budget)
    pts2 = two_torsion(model)
    found: list[RationalPoint] = list(pts2)

    # 2-power part: halve order-2 points, then halve any order-4 points.
    full_two = len(pts2) == 3
    want4 = bound % 8 == 0 if full_two else bound % 4 == 0
    pts4: list[RationalPoint] = []
    if pts2 and want4:
        for tors in pts2:
            for x in _halving_quartic(model, tors.x):
                for cand in _points_at_x(model, x):
                    if point_order(model, cand) == 4:
                        pts4.append(cand)
        found.extend(pts4)
    if pts4 and bound % (16 if full_two else 8) == 0:
        for tors in pts4:
            for x in _halving_quartic(model, tors.x):
                for cand in _points_at_x(model, x):
                    if point_order(model, cand) == 8:
                        found.append(cand)

    # odd part: at most one odd prime power (orders 3, 5, 7, 9)
    odd_polys = None
    for n in (9, 7, 5, 3):
        if bound % n != 0:
            continue
        if odd_polys is None:
            odd_polys = _odd_division_polynomials(model)
        for x in rational_roots(odd_polys[n]):
            for cand in _points_at_x(model, x):
                if point_order(model, cand) == n:
                    found.append(cand)

    group = _closure(model, found)
    order = len(group)
    orders = {pt: (1 if pt.is_infinity else point_order(model, pt)) for pt in group}
    exponent = max(orders.values())
    assert bound % order == 0, "torsion order must divide the reduction bound"

    if order == 1:
        return TorsionGroup((1,), 1, ())
    if exponent == order:
        gen = next(pt for pt, n in orders.items() if n == exponent)
        return TorsionGroup((order,), order, (gen,))
    # non-cyclic rational torsion is Z/2 x Z/2m
    assert exponent * 2 == order, "unexpected torsion shape"
    gen = next(pt for pt, n in orders.items() if n == exponent)
    cyclic_part = set()
    acc = INFINITY
    for _ in range(exponent):
        acc = add_points(model, acc, gen)
        cyclic_part.add(acc)
    other = next(pt for pt, n in orders.items() if n == 2 and pt not in cyclic_part)
    return TorsionGroup((2, exponent), order, (other, gen))
