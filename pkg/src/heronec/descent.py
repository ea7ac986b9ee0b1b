"""Complete 2-descent for curves with full rational 2-torsion.

For y^2 = (x - e1)(x - e2)(x - e3) with integer roots, a rational point
maps to the pair of square classes (x - e1, x - e2) in (Q*/Q*^2)^2.  The
map is an injective homomorphism on E(Q)/2E(Q), so:

  * counting the everywhere-locally-solvable class pairs gives 2^(s+2)
    and the Selmer rank s, an upper bound for the rank;
  * exhibiting rational points whose images span a subgroup of size 2^(r+2)
    certifies rank >= r.

Local solvability of a class pair (b1, b2) at a place is decided through
the one-variable criterion: writing X = x - e1, the pair is in the local
image iff some X in Q_p (or the point at infinity) satisfies

    X in b1*sq,   X - (e2-e1) in b2*sq,   X - (e3-e1) in b1b2*sq,

each set enlarged by {0}.  Over R this is an interval intersection.  Over
Q_p it is decided by a finite digit search: a condition is pinned once its
value is known beyond the square-class precision (1 digit for odd p, 3 for
p = 2) and is freely satisfiable once X matches its constant to the full
working precision, so the search tree is finite and the verdict certified.

Class pairs are enumerated over supports dictated by the classical
valuation lemma: away from 2, x - e1 has even valuation at any prime not
dividing (e1-e2)(e1-e3), so b1 is supported on sign, 2, and the odd primes
of that product (likewise b2, and the product b1*b2 for the third root).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from .curves import (
    INFINITY,
    IntegralModel,
    PointNotOnCurve,
    RationalPoint,
    is_on_curve,
)
from .numtheory import factorize, jacobi_symbol, squarefree_part
from .torsion import INFINITE_ORDER, point_order, two_torsion

__all__ = [
    "SearchExhausted",
    "SquareClassPair",
    "HomogeneousSpace",
    "DescentEffort",
    "RankBounds",
    "DescentWitness",
    "descent_image",
    "locally_solvable",
    "global_point_search",
    "selmer_rank_upper",
    "rank_bounds",
]


class SearchExhausted(RuntimeError):
    """Global point search hit its height bound: undecided, not nonexistent."""

    def __init__(self, height_bound: int):
        super().__init__(f"no solution with numerator/denominator up to {height_bound}")
        self.height_bound = height_bound


class SquareClassPair(NamedTuple):
    """Representatives (b1, b2) in (Q*/Q*^2)^2, both squarefree."""

    b1: int
    b2: int

    def mul(self, other: "SquareClassPair") -> "SquareClassPair":
        return SquareClassPair(
            squarefree_part(self.b1 * other.b1),
            squarefree_part(self.b2 * other.b2),
        )

    @property
    def is_trivial(self) -> bool:
        return self.b1 == 1 and self.b2 == 1


@dataclass(frozen=True)
class HomogeneousSpace:
    """The pair of quadrics attached to (b1, b2):

        b1 z1^2 - b2 z2^2    = e2 - e1
        b1 z1^2 - b1b2 z3^2  = e3 - e1
    """

    b1: int
    b2: int
    e1: int
    e2: int
    e3: int

    def __post_init__(self):
        if len({self.e1, self.e2, self.e3}) != 3:
            raise ValueError("roots must be pairwise distinct")
        if self.b1 == 0 or self.b2 == 0:
            raise ValueError("class representatives must be nonzero")


# --------------------------------------------------------------------------
# square classes of rationals

def _sf_rational(q: Fraction) -> int:
    """Squarefree integer representing q in Q*/Q*^2."""
    return squarefree_part(q.numerator * q.denominator)


def descent_image(
    model: IntegralModel,
    point: RationalPoint,
    roots: Optional[Sequence[int]] = None,
) -> SquareClassPair:
    """Image of a point under (x - e1, x - e2) mod squares.

    Conventions: infinity -> (1, 1); at the 2-torsion points the vanishing
    coordinate is replaced by the product of the other two root gaps.
    """
    if roots is None:
        roots = _split_roots(model)
    e1, e2, e3 = roots
    if point.is_infinity:
        return SquareClassPair(1, 1)
    if not is_on_curve(model, point):
        raise PointNotOnCurve(f"{point} is not on {model}")
    x = point.x
    if x == e1:
        return SquareClassPair(
            squarefree_part((e1 - e2) * (e1 - e3)), squarefree_part(e1 - e2)
        )
    if x == e2:
        return SquareClassPair(
            squarefree_part(e2 - e1), squarefree_part((e2 - e1) * (e2 - e3))
        )
    return SquareClassPair(_sf_rational(x - e1), _sf_rational(x - e2))


def _split_roots(model: IntegralModel) -> tuple[int, int, int]:
    pts = two_torsion(model)
    if len(pts) != 3:
        raise ValueError("complete 2-descent needs a fully split cubic")
    xs = sorted(int(p.x) for p in pts)
    return xs[0], xs[1], xs[2]


# --------------------------------------------------------------------------
# local solvability

_INF = Fraction(10**9)  # sentinel bounds for real interval work


def _solvable_real(b1: int, b2: int, d: int, dp: int) -> bool:
    """Intersection of the three sign conditions over R.

    X ranges over the closed ray b1 * [0, oo); conditions b2(X-d) >= 0 and
    b1b2(X-dp) >= 0 carve half-lines.
    """
    lo = [Fraction(0) if b1 > 0 else None]  # None = unbounded below
    hi = [None if b1 > 0 else Fraction(0)]

    for coeff, const in ((b2, d), (b1 * b2, dp)):
        if coeff > 0:
            lo.append(Fraction(const))
        else:
            hi.append(Fraction(const))
    lo_val = max(v for v in lo if v is not None) if any(v is not None for v in lo) else None
    hi_vals = [v for v in hi if v is not None]
    hi_val = min(hi_vals) if hi_vals else None
    if lo_val is None or hi_val is None:
        return True
    return lo_val <= hi_val


def _vp(q: Fraction, p: int) -> int:
    v = 0
    n = q.numerator
    while n % p == 0:
        n //= p
        v += 1
    m = q.denominator
    while m % p == 0:
        m //= p
        v -= 1
    return v


class _LocalContext:
    """Per-prime scratch: square-class precision and a unit residue test."""

    def __init__(self, p: int):
        self.p = p
        self.sqprec = 3 if p == 2 else 1
        if p != 2 and p < 50000:
            table = bytearray(p)
            for y in range((p >> 1) + 1):
                table[(y * y) % p] = 1
            self._table = table
        else:
            self._table = None

    def unit_is_square(self, num: int, den: int) -> bool:
        p = self.p
        if p == 2:
            inv = pow(den % 8, -1, 8)
            return (num * inv) % 8 == 1
        u = num % p * pow(den % p, -1, p) % p
        if self._table is not None:
            return self._table[u] == 1
        return jacobi_symbol(u, p) == 1

    def is_square(self, q: Fraction) -> bool:
        """q in (Q_p*)^2 (q nonzero)."""
        v = _vp(q, self.p)
        if v % 2:
            return False
        pv = self.p**v
        num, den = q.numerator, q.denominator
        if v >= 0:
            num //= pv
        else:
            den //= self.p ** (-v)
        return self.unit_is_square(num, den)


def _solvable_at_p(ctx: _LocalContext, b1: int, b2: int, d: int, dp: int) -> bool:
    """Decide existence of X in Q_p with X in b1*sq u {0},
    X-d in b2*sq u {0}, X-dp in b1b2*sq u {0}."""
    p = ctx.p
    sqprec = ctx.sqprec
    consts = (Fraction(0), Fraction(d), Fraction(dp))
    classes = (Fraction(b1), Fraction(b2), Fraction(b1 * b2))

    diffs = [d, dp, dp - d]
    vmax = max(_vp(Fraction(x), p) for x in diffs)
    vmin = min(_vp(Fraction(x), p) for x in diffs)
    max_abs = vmax + 2 * sqprec + 6

    def node(x: Fraction, prec: int) -> bool:
        """x is pinned mod p^prec; decide satisfiability in its ball."""
        free = []
        for i in range(3):
            q = x - consts[i]
            if q == 0 or _vp(q, p) >= prec:
                free.append(i)
                continue
            if _vp(q, p) + sqprec <= prec:
                if not ctx.is_square(classes[i] * q):
                    return False  # pinned and failing for the whole ball
            else:
                free.append(-1)  # undecided: must refine
        if len(free) <= 1 and -1 not in free:
            return True
        if prec > max_abs:
            # distinct constants separate below this depth
            raise AssertionError("local search depth exceeded its certified cap")
        step = Fraction(p) ** prec
        return any(node(x + g * step, prec + 1) for g in range(p))

    # X = 0 exactly (the z1 = 0 solution)
    if ctx.is_square(classes[1] * -consts[1]) and ctx.is_square(classes[2] * -consts[2]):
        return True
    margin = 2 * sqprec + 4
    for v in range(vmin - margin, vmax + margin + 1):
        lead = Fraction(p) ** v
        for u in range(1, p):
            if node(u * lead, v + 1):
                return True
    return False


def _bad_primes(space: HomogeneousSpace) -> list[int]:
    prod = (
        (space.e1 - space.e2)
        * (space.e1 - space.e3)
        * (space.e2 - space.e3)
        * space.b1
        * space.b2
    )
    odd = [q for q in factorize(prod).primes() if q != 2]
    return [2] + sorted(odd)


def locally_solvable(space: HomogeneousSpace) -> bool:
    """True iff the space has real points and Q_p points for every
    p in {2} u {p | disc} u {p | b1 b2}; good odd primes are automatically
    solvable (smooth genus-1 reduction has F_p points by Hasse-Weil)."""
    e1 = space.e1
    d, dp = space.e2 - e1, space.e3 - e1
    if not _solvable_real(space.b1, space.b2, d, dp):
        return False
    for p in _bad_primes(space):
        if not _solvable_at_p(_LocalContext(p), space.b1, space.b2, d, dp):
            return False
    return True


# --------------------------------------------------------------------------
# global search

class DescentWitness(NamedTuple):
    point: RationalPoint
    z: Optional[tuple[Fraction, Fraction, Fraction]]


def global_point_search(space: HomogeneousSpace, height_bound: int) -> DescentWitness:
    """Naive z-search: z1 = m/n over heights up to the bound, square-testing
    the two remaining coordinates.  A hit maps back to a curve point whose
    descent image is (b1, b2).  Raises SearchExhausted when nothing is found;
    that verdict means undecided, never nonexistent."""
    b1, b2 = space.b1, space.b2
    e1 = space.e1
    d, dp = space.e2 - e1, space.e3 - e1
    if squarefree_part(b1) == 1 and squarefree_part(b2) == 1:
        return DescentWitness(INFINITY, None)  # the class of the point at infinity

    b12 = b1 * b2
    for h in range(1, height_bound + 1):
        pairs = itertools.chain(
            ((h, n) for n in range(1, h + 1)),
            ((m, h) for m in range(0, h)),
        )
        for m, n in pairs:
            if math.gcd(m, n) != 1:
                continue
            mm = b1 * m * m
            a = mm - d * n * n
            ab = a * b2
            if ab < 0:
                continue
            r = math.isqrt(ab)
            if r * r != ab:
                continue
            b = mm - dp * n * n
            bb = b * b12
            if bb < 0:
                continue
            s = math.isqrt(bb)
            if s * s != bb:
                continue
            z1 = Fraction(m, n)
            z2 = Fraction(r, abs(b2) * n)
            z3 = Fraction(s, abs(b12) * n)
            x = e1 + b1 * z1 * z1
            y = b12 * z1 * z2 * z3
            return DescentWitness(RationalPoint(x, y), (z1, z2, z3))
    raise SearchExhausted(height_bound)


# --------------------------------------------------------------------------
# Selmer enumeration

def _class_vector(pair: SquareClassPair) -> frozenset:
    """Square-class pair as an F_2 vector: tagged primes and signs;
    multiplication mod squares is symmetric difference."""
    tags = set()
    for side, b in (("L", pair.b1), ("R", pair.b2)):
        if b < 0:
            tags.add((side, -1))
        for q, e in factorize(b).factors:
            if e % 2:
                tags.add((side, q))
    return frozenset(tags)


class _Span:
    """F_2 span of class vectors via incremental elimination."""

    def __init__(self):
        self.basis: list[frozenset] = []

    def _reduce(self, vec: frozenset) -> frozenset:
        for b in self.basis:
            if min(b) in vec:
                vec = vec ^ b
        return vec

    def contains(self, vec: frozenset) -> bool:
        return not self._reduce(vec)

    def add(self, vec: frozenset) -> bool:
        vec = self._reduce(vec)
        if not vec:
            return False
        self.basis.append(vec)
        self.basis.sort(key=min)
        return True

    @property
    def dim(self) -> int:
        return len(self.basis)


def _squarefree_products(primes: Sequence[int]) -> list[int]:
    out = [1]
    for q in primes:
        out += [v * q for v in out]
    return out


@dataclass
class _DescentSetup:
    model: IntegralModel
    e1: int
    e2: int
    e3: int
    contexts: dict[int, _LocalContext] = field(default_factory=dict)

    @property
    def roots(self) -> tuple[int, int, int]:
        return (self.e1, self.e2, self.e3)

    def context(self, p: int) -> _LocalContext:
        if p not in self.contexts:
            self.contexts[p] = _LocalContext(p)
        return self.contexts[p]

    def space(self, pair: SquareClassPair) -> HomogeneousSpace:
        return HomogeneousSpace(pair.b1, pair.b2, self.e1, self.e2, self.e3)


def _setup(model: IntegralModel) -> _DescentSetup:
    e1, e2, e3 = _split_roots(model)
    return _DescentSetup(model, e1, e2, e3)


def _selmer_set(setup: _DescentSetup) -> list[SquareClassPair]:
    """All everywhere-locally-solvable class pairs.

    Support restriction (valuation lemma at odd p): b1 over primes of
    (e1-e2)(e1-e3), b2 over primes of (e2-e1)(e2-e3), and any odd prime
    dividing b1*b2 to odd order must divide (e3-e1)(e3-e2).
    """
    e1, e2, e3 = setup.roots
    d1 = (e1 - e2) * (e1 - e3)
    d2 = (e2 - e1) * (e2 - e3)
    d3 = (e3 - e1) * (e3 - e2)
    odd1 = [q for q in factorize(d1).primes() if q != 2]
    odd2 = [q for q in factorize(d2).primes() if q != 2]
    allowed3 = set(factorize(d3).primes()) | {2}

    d, dp = e2 - e1, e3 - e1
    bad = [2] + sorted(
        {q for q in factorize(d1 * (e2 - e3)).primes() if q != 2}
    )

    candidates1 = [s * v for v in _squarefree_products([2] + odd1) for s in (1, -1)]
    candidates2 = [s * v for v in _squarefree_products([2] + odd2) for s in (1, -1)]

    survivors = []
    for b1 in candidates1:
        set1 = {q for q, e in factorize(b1).factors}
        for b2 in candidates2:
            set2 = {q for q, e in factorize(b2).factors}
            if any(q not in allowed3 for q in set1 ^ set2):
                continue
            if not _solvable_real(b1, b2, d, dp):
                continue
            pair_bad = set(bad)
            for q, e in factorize(b1 * b2).factors:
                if e % 2:
                    pair_bad.add(q)
            ok = True
            for p in sorted(pair_bad):
                if not _solvable_at_p(setup.context(p), b1, b2, d, dp):
                    ok = False
                    break
            if ok:
                survivors.append(SquareClassPair(b1, b2))

    count = len(survivors)
    log = count.bit_length() - 1
    if count < 4 or (1 << log) != count:
        raise AssertionError(
            f"locally solvable class count {count} is not a power of 2 >= 4"
        )
    survivor_set = set(survivors)
    for a, b in itertools.product(survivors[: min(count, 64)], repeat=2):
        if a.mul(b) not in survivor_set:
            raise AssertionError("solvable classes are not multiplicatively closed")
    return sorted(survivors)


def selmer_rank_upper(model: IntegralModel) -> int:
    """s with 2^(s+2) everywhere-locally-solvable pairs; rank <= s."""
    survivors = _selmer_set(_setup(model))
    return len(survivors).bit_length() - 3


# --------------------------------------------------------------------------
# rank bounds

@dataclass(frozen=True)
class DescentEffort:
    """Search budgets for rank determination."""

    height_bound: int = 1 << 12
    height_bound_max: int = 1 << 16
    direct_search_span: int = 60000
    torsion_prime_budget: int = 10


@dataclass(frozen=True)
class RankBounds:
    rank_lower: int
    selmer_upper: int
    witnesses: tuple[tuple[RationalPoint, SquareClassPair], ...]
    undecided_classes: tuple[SquareClassPair, ...]
    status: str  # "determined" | "interval"

    def __post_init__(self):
        assert self.rank_lower <= self.selmer_upper


def _direct_point_search(model: IntegralModel, roots, span_budget: int):
    """Integer x sweep over the two real components of the curve."""
    e1, e2, e3 = roots
    points = []
    egg = range(e1, e2 + 1)
    if len(egg) > span_budget // 2:
        egg = range(e1, e1 + span_budget // 2)
    for x in itertools.chain(egg, range(e3, e3 + span_budget - len(egg))):
        fx = model.rhs(x)
        if fx < 0:
            continue
        r = math.isqrt(fx)
        if r * r == fx:
            points.append(RationalPoint(Fraction(x), Fraction(r)))
    return points


def rank_bounds(
    model: IntegralModel,
    effort: DescentEffort = DescentEffort(),
    known_points: Sequence[RationalPoint] = (),
) -> RankBounds:
    """Certified rank interval [rank_lower, selmer_upper].

    rank_lower is log2 of the subgroup of (Q*/Q*^2)^2 generated by images
    of torsion and of every rational point found (supplied, direct search,
    and homogeneous-space search over solvable classes), minus 2; a point
    of infinite order among the witnesses floors it at 1.  Classes whose
    search exhausted the height budget are reported as undecided and the
    status degrades to "interval".
    """
    setup = _setup(model)
    roots = setup.roots
    survivors = _selmer_set(setup)
    selmer_upper = len(survivors).bit_length() - 3

    span = _Span()
    witnesses: list[tuple[RationalPoint, SquareClassPair]] = []
    has_infinite = False

    def feed(point: RationalPoint) -> None:
        nonlocal has_infinite
        pair = descent_image(setup.model, point, roots)
        if span.add(_class_vector(pair)):
            witnesses.append((point, pair))
        if not has_infinite and not point.is_infinity:
            if point_order(setup.model, point) == INFINITE_ORDER:
                has_infinite = True

    for pt in two_torsion(model):
        feed(pt)
    for pt in known_points:
        if not is_on_curve(model, pt):
            raise PointNotOnCurve(f"supplied point {pt} is not on the curve")
        if not pt.is_infinity:
            feed(pt)
    for pt in _direct_point_search(model, roots, effort.direct_search_span):
        feed(pt)

    undecided: list[SquareClassPair] = []
    order = sorted(survivors, key=lambda c: (abs(c.b1) * abs(c.b2), c))
    for pair in order:
        if pair.is_trivial or span.contains(_class_vector(pair)):
            continue
        space = setup.space(pair)
        height = effort.height_bound
        found = None
        while found is None and height <= effort.height_bound_max:
            try:
                found = global_point_search(space, height)
            except SearchExhausted:
                height *= 2
        if found is None:
            undecided.append(pair)
        else:
            feed(found.point)

    rank_lower = span.dim - 2
    if has_infinite:
        rank_lower = max(rank_lower, 1)
    status = "determined" if rank_lower == selmer_upper else "interval"
    return RankBounds(
        rank_lower=rank_lower,
        selmer_upper=selmer_upper,
        witnesses=tuple(witnesses),
        undecided_classes=tuple(undecided),
        status=status,
    )
