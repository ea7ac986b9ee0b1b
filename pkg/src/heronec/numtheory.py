"""Exact integer and rational utilities: factorization, square classes,
quadratic residues, and rational root finding.

Everything here is exact big-integer / big-rational arithmetic; no floats.
All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Sequence

__all__ = [
    "FactorizationIncomplete",
    "Factorization",
    "factorize",
    "squarefree_part",
    "jacobi_symbol",
    "sqrt_mod_p",
    "is_rational_square",
    "rational_roots",
    "is_probable_prime",
    "primes_up_to",
    "iter_primes",
    "TRIAL_DIVISION_BOUND",
    "RHO_ITERATION_BUDGET",
    "MILLER_RABIN_ROUNDS",
]

# Defaults: trial division handles the smooth parts of family discriminants,
# Pollard rho the mid-sized cofactors.  Callers may raise either knob.
TRIAL_DIVISION_BOUND = 10**6
RHO_ITERATION_BUDGET = 10**7

# 40 Miller-Rabin rounds -> error probability <= 4^-40 = 2^-80 per composite.
MILLER_RABIN_ROUNDS = 40


class FactorizationIncomplete(Exception):
    """Raised when a factorization budget is exhausted.

    Never returned as a silent partial result; the caller may retry with a
    larger trial bound or rho budget.
    """


# --------------------------------------------------------------------------
# primes

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def primes_up_to(n: int) -> list[int]:
    """All primes <= n by a plain sieve of Eratosthenes."""
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i, flag in enumerate(sieve) if flag]


def iter_primes(start: int = 2) -> Iterator[int]:
    """Unbounded ascending prime iterator (first prime >= start)."""
    n = max(2, start)
    if n == 2:
        yield 2
        n = 3
    if n % 2 == 0:
        n += 1
    while True:
        if is_probable_prime(n):
            yield n
        n += 2


@lru_cache(maxsize=8)
def _trial_primes(bound: int) -> tuple[int, ...]:
    return tuple(primes_up_to(bound))


def is_probable_prime(n: int, rounds: int = MILLER_RABIN_ROUNDS) -> bool:
    """Miller-Rabin with `rounds` bases (error <= 4**-rounds for composites).

    Bases are drawn from a PRNG seeded by n, so results are reproducible.
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    rng = random.Random(n)
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


# --------------------------------------------------------------------------
# factorization

@dataclass(frozen=True)
class Factorization:
    """Complete factorization: sign * prod(p**e), primes strictly increasing."""

    sign: int
    factors: tuple[tuple[int, int], ...]

    def value(self) -> int:
        out = self.sign
        for p, e in self.factors:
            out *= p**e
        return out

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def divisors(self) -> list[int]:
        """All positive divisors, ascending."""
        divs = [1]
        for p, e in self.factors:
            divs = [d * p**i for d in divs for i in range(e + 1)]
        return sorted(divs)

    def squarefree_part(self) -> int:
        out = self.sign
        for p, e in self.factors:
            if e % 2:
                out *= p
        return out

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)


def _pollard_rho_brent(n: int, budget: int, rng: random.Random) -> tuple[Optional[int], int]:
    """Brent-cycle Pollard rho.

    Returns (factor or None, iterations consumed).  `n` must be odd,
    composite, and not a prime power obstacle for rho in practice.
    """
    used = 0
    while used < budget:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1 and used < budget:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1 and used < budget:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = (q * abs(x - y)) % n
                used += min(m, r - k)
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            # backtrack one step at a time
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
                used += 1
                if used >= budget:
                    break
        if 1 < g < n:
            return g, used
        # retry with a new polynomial
    return None, used


@lru_cache(maxsize=65536)
def _factorize_cached(n: int, bound: int, rho_budget: int) -> Factorization:
    sign = -1 if n < 0 else 1
    m = abs(n)
    factors: dict[int, int] = {}
    if m == 1:
        return Factorization(sign, ())

    for p in _trial_primes(bound):
        if p * p > m:
            break
        while m % p == 0:
            factors[p] = factors.get(p, 0) + 1
            m //= p
    if m > 1 and m <= bound * bound:
        # cofactor below the square of the trial bound is prime
        factors[m] = factors.get(m, 0) + 1
        m = 1

    if m > 1:
        budget = rho_budget
        rng = random.Random(m)
        stack = [m]
        while stack:
            comp = stack.pop()
            if is_probable_prime(comp):
                factors[comp] = factors.get(comp, 0) + 1
                continue
            root = math.isqrt(comp)
            if root * root == comp:
                stack.extend([root, root])
                continue
            d, used = _pollard_rho_brent(comp, budget, rng)
            budget -= used
            if d is None:
                raise FactorizationIncomplete(
                    f"rho budget exhausted factoring {comp} (from {n})"
                )
            stack.extend([d, comp // d])

    return Factorization(sign, tuple(sorted(factors.items())))


def factorize(
    n: int,
    bound: int = TRIAL_DIVISION_BOUND,
    rho_budget: int = RHO_ITERATION_BUDGET,
) -> Factorization:
    """Fully factor n: trial division to `bound`, then Brent-rho.

    Raises FactorizationIncomplete if the rho iteration budget runs out;
    there is no silent partial output.
    """
    if n == 0:
        raise ValueError("cannot factor 0")
    return _factorize_cached(int(n), bound, rho_budget)


def squarefree_part(
    n: int,
    bound: int = TRIAL_DIVISION_BOUND,
    rho_budget: int = RHO_ITERATION_BUDGET,
) -> int:
    """The squarefree d with n = d * m**2 and sign(d) = sign(n)."""
    if n == 0:
        raise ValueError("squarefree part of 0 is undefined")
    return factorize(n, bound, rho_budget).squarefree_part()


# --------------------------------------------------------------------------
# quadratic residues

def jacobi_symbol(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n >= 1, by binary reciprocity."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("n must be an odd positive integer")
    a %= n
    result = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def sqrt_mod_p(a: int, p: int) -> Optional[int]:
    """A square root of a mod p, or None when a is a non-residue.

    Tonelli-Shanks for p = 1 mod 8; direct exponentiation otherwise.
    """
    a %= p
    if p == 2:
        return a
    if a == 0:
        return 0
    if jacobi_symbol(a, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    if p % 8 == 5:
        r = pow(a, (p + 3) // 8, p)
        if (r * r) % p != a:
            r = (r * pow(2, (p - 1) // 4, p)) % p
        return r
    # Tonelli-Shanks
    q = p - 1
    s = 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while jacobi_symbol(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2 = t
        i = 0
        while t2 != 1:
            t2 = (t2 * t2) % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, (b * b) % p
        t, r = (t * c) % p, (r * b) % p
    return r


# --------------------------------------------------------------------------
# rational squares and rational roots

def is_rational_square(q: Fraction | int) -> tuple[bool, Optional[Fraction]]:
    """(True, nonnegative root) if q is the square of a rational."""
    q = Fraction(q)
    if q < 0:
        return False, None
    if q == 0:
        return True, Fraction(0)
    rn = math.isqrt(q.numerator)
    if rn * rn != q.numerator:
        return False, None
    rd = math.isqrt(q.denominator)
    if rd * rd != q.denominator:
        return False, None
    return True, Fraction(rn, rd)


# Prefilter primes for candidate root testing; large enough that candidate
# denominators stay below them at desk scale.
_FILTER_PRIMES = (2147483647, 2305843009213693951)


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _newton_polygon_valuations(ints: list[int], p: int) -> set[int]:
    """Possible p-adic valuations of roots of sum(ints[i] x^i).

    Every root valuation is the negative of a slope of the lower Newton
    polygon over the points (i, v_p(c_i)); only integral slopes can belong
    to rational roots.
    """
    pts = [(i, _valuation(c, p)) for i, c in enumerate(ints) if c != 0]
    hull: list[tuple[int, int]] = []
    for pt in pts:  # lower convex hull, left to right
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    allowed = set()
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        dy, dx = y2 - y1, x2 - x1
        if dy % dx == 0:
            allowed.add(-(dy // dx))
    return allowed


def rational_roots(
    coefficients: Sequence[Fraction | int],
    bound: int = TRIAL_DIVISION_BOUND,
    rho_budget: int = RHO_ITERATION_BUDGET,
) -> set[Fraction]:
    """Exactly the rational roots of sum(c[i] * x**i), coefficients ascending.

    Rational root theorem: after clearing denominators, candidates are
    +-p/q with p dividing the constant and q the leading coefficient.  The
    divisor space is pruned by Newton polygons (a root's valuation at each
    prime must be a negated integral hull slope), then candidates are
    prefiltered modulo a large prime before the exact evaluation.
    """
    coeffs = [Fraction(c) for c in coefficients]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        raise ValueError("zero polynomial has every rational as a root")
    if len(coeffs) == 1:
        return set()

    roots: set[Fraction] = set()
    low = 0
    while coeffs[low] == 0:
        low += 1
    if low > 0:
        roots.add(Fraction(0))
        coeffs = coeffs[low:]
        if len(coeffs) == 1:
            return roots

    denom_lcm = math.lcm(*(c.denominator for c in coeffs))
    ints = [int(c * denom_lcm) for c in coeffs]
    content = math.gcd(*ints)
    ints = [c // content for c in ints]
    c0, cn = ints[0], ints[-1]

    support = sorted(
        set(factorize(c0, bound, rho_budget).primes())
        | set(factorize(cn, bound, rho_budget).primes())
    )
    choices: list[list[tuple[int, int]]] = []
    for p in support:
        allowed = _newton_polygon_valuations(ints, p)
        if not allowed:
            return roots  # some root valuation is non-integral at p: no rational roots
        choices.append([(p, v) for v in sorted(allowed)])

    candidates = [Fraction(1)]
    for options in choices:
        candidates = [
            c * Fraction(p) ** v if v >= 0 else c / Fraction(p) ** (-v)
            for c in candidates
            for p, v in options
        ]

    # mod-P prefilter: a true root p/q satisfies poly(p * q^-1) = 0 mod P
    filt = next(P for P in _FILTER_PRIMES if cn % P != 0)
    ints_mod = [c % filt for c in ints]

    def eval_mod(x: int) -> int:
        acc = 0
        for c in reversed(ints_mod):
            acc = (acc * x + c) % filt
        return acc

    def eval_exact(x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(ints):
            acc = acc * x + c
        return acc

    for cand in candidates:
        if cand.denominator % filt == 0:
            continue  # cannot prefilter; fall through to exact check
        rep = cand.numerator % filt * pow(cand.denominator, -1, filt) % filt
        for sgn in (1, -1):
            if eval_mod(sgn * rep % filt) != 0:
                continue
            signed = sgn * cand
            if eval_exact(signed) == 0:
                roots.add(signed)
    return roots
