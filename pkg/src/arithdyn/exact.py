"""Exact rationals, projective and torus points over Q, and Weil heights.

Rationals are :class:`fractions.Fraction` (aliased ``Rat``); it already keeps
numerator and denominator coprime with a positive denominator, and 0 is 0/1.
Heights are natural logarithms computed from exact integers.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Sequence

from .errors import AllZero, BoundTooLarge, DomainViolation
from .factor import factorize

try:
    import gmpy2
    mpz = gmpy2.mpz
except ImportError:  # pragma: no cover
    gmpy2 = None
    mpz = int


def gcd_all(values: Iterable[int]) -> int:
    """Nonnegative gcd of a sequence of integers (0 for an all-zero sequence).

    Orbit coordinates reach millions of bits, where CPython's quadratic gcd
    dominates the run time; GMP's subquadratic gcd is used when present.
    """
    if gmpy2 is None:
        return reduce(math.gcd, values, 0)
    g = gmpy2.mpz(0)
    for v in values:
        g = gmpy2.gcd(g, v)
        if g == 1:
            break
    return int(g)


def _make_fraction(num: int, den: int) -> Fraction:
    # num/den already coprime with den > 0: skip Fraction's own gcd pass
    maker = getattr(Fraction, "_from_coprime_ints", None)
    if maker is not None:
        return maker(num, den)
    return Fraction(num, den, _normalize=False)


def monomial(xs: Sequence[Fraction], m: Sequence[int]) -> Fraction:
    """Exact value of the character x^m at a torus point."""
    num, den = mpz(1), mpz(1)
    for x, e in zip(xs, m):
        if not e:
            continue
        a, b = (x.numerator, x.denominator) if e > 0 else (x.denominator, x.numerator)
        e = abs(e)
        num *= mpz(a) ** e
        den *= mpz(b) ** e
    if den < 0:
        num, den = -num, -den
    g = gcd_all((num, den))
    return _make_fraction(int(num // g), int(den // g))


def lcm_all(values: Iterable[int]) -> int:
    """Least common multiple of positive integers (1 for an empty sequence)."""
    if gmpy2 is None:
        return reduce(math.lcm, values, 1)
    m = gmpy2.mpz(1)
    for v in values:
        m = gmpy2.lcm(m, v)
    return int(m)

Rat = Fraction

POINT_CAP = 10**7
# Slack when comparing a float height against a user bound such as log(100).
_BOUND_SLACK = 1e-12


def as_rat(value) -> Fraction:
    """Coerce ints, Fractions and decimal/ratio strings ("-5/8") to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a string or Fraction")
    return Fraction(value)


def log_int(n: int) -> float:
    """Natural log of a positive integer of any size (math.log is exact-input)."""
    if n <= 0:
        raise ValueError("log of non-positive integer")
    return math.log(n)


@dataclass(frozen=True)
class ProjPoint:
    """Canonical point of P^N(Q): coprime integers, first nonzero entry positive."""

    coords: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(v) for v in self.coords)
        object.__setattr__(self, "coords", c)
        if not c:
            raise ValueError("a projective point needs at least one coordinate")
        if not any(c):
            raise AllZero("all coordinates are zero")
        if gcd_all(c) != 1:
            raise ValueError(f"coordinates {c} are not coprime; use normalize()")
        if next(v for v in c if v) < 0:
            raise ValueError(f"first nonzero coordinate of {c} is negative; use normalize()")

    @property
    def dim(self) -> int:
        return len(self.coords) - 1

    def bits(self) -> int:
        return sum(abs(v).bit_length() for v in self.coords)

    def to_json(self) -> list[str]:
        return [str(v) for v in self.coords]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "ProjPoint":
        return normalize([as_rat(v) for v in data])

    def __str__(self):
        return "(" + " : ".join(map(str, self.coords)) + ")"


@dataclass(frozen=True)
class TorusPoint:
    """Point of the split torus G_m^n over Q."""

    coords: tuple[Fraction, ...]

    def __post_init__(self):
        c = tuple(as_rat(v) for v in self.coords)
        object.__setattr__(self, "coords", c)
        if not c:
            raise ValueError("torus point needs n >= 1 coordinates")
        if any(v == 0 for v in c):
            raise DomainViolation(f"torus coordinates must be nonzero, got {c}")

    @property
    def n(self) -> int:
        return len(self.coords)

    def bits(self) -> int:
        return sum(v.numerator.bit_length() + v.denominator.bit_length() for v in self.coords)

    def __mul__(self, other: "TorusPoint") -> "TorusPoint":
        return TorusPoint(tuple(a * b for a, b in zip(self.coords, other.coords, strict=True)))

    def to_json(self) -> list[str]:
        return [str(v) for v in self.coords]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "TorusPoint":
        return cls(tuple(as_rat(v) for v in data))


@dataclass(frozen=True)
class PrimeSupport:
    """Signed prime-exponent description of a torus point.

    ``exponents[i][j]`` is ord_{primes[j]} of coordinate ``i``.
    """

    primes: tuple[int, ...]
    exponents: tuple[tuple[int, ...], ...]
    signs: tuple[int, ...]

    def reconstruct(self) -> tuple[Fraction, ...]:
        out = []
        for sign, row in zip(self.signs, self.exponents):
            v = Fraction(sign)
            for p, e in zip(self.primes, row):
                v *= Fraction(p) ** e
            out.append(v)
        return tuple(out)


def trusted_point(coords: tuple[int, ...]) -> ProjPoint:
    """Wrap coordinates already known to be canonical, skipping the gcd check."""
    out = object.__new__(ProjPoint)
    object.__setattr__(out, "coords", coords)
    return out


def normalize(raw: Iterable) -> ProjPoint:
    """Canonical representative of the projective point with coordinates ``raw``.

    >>> normalize([Fraction(2, 3), Fraction(4, 5)])
    ProjPoint(coords=(5, 6))
    """
    vals = [as_rat(v) for v in raw]
    if not any(vals):
        raise AllZero("cannot normalize the zero vector")
    den = mpz(lcm_all(v.denominator for v in vals))
    ints = [mpz(v.numerator) * (den // v.denominator) for v in vals]
    g = gcd_all(ints)
    if next(v for v in ints if v) < 0:
        g = -g
    return trusted_point(tuple(int(v // g) for v in ints))


def weil_height(p: ProjPoint) -> float:
    """log max |x_i| on canonical coordinates."""
    return log_int(max(abs(v) for v in p.coords))


def _ord(n: int, q: int) -> int:
    e = 0
    while n % q == 0:
        n //= q
        e += 1
    return e


def height_via_places(p) -> float:
    """Sum over all places of Q of log max_i |x_i|_v.

    Works on any nonzero coordinate vector (a ProjPoint or raw rationals), so it
    doubles as an independent check of normalization: the product formula
    makes the result independent of the representative.
    """
    coords = p.coords if isinstance(p, ProjPoint) else tuple(as_rat(v) for v in p)
    vals = [as_rat(v) for v in coords]
    nonzero = [v for v in vals if v != 0]
    if not nonzero:
        raise AllZero("height of the zero vector")
    arch = max(abs(v) for v in nonzero)
    total = log_int(arch.numerator) - log_int(arch.denominator)
    primes: set[int] = set()
    for v in nonzero:
        primes.update(factorize(v.numerator))
        primes.update(factorize(v.denominator))
    for q in sorted(primes):
        # log max_i |x_i|_q = -min_i ord_q(x_i) * log q
        min_ord = min(_ord(v.numerator, q) - _ord(v.denominator, q) for v in nonzero)
        if min_ord:
            total += -min_ord * math.log(q)
    return total


def torus_height(x: TorusPoint) -> float:
    """Height through the (P^1)^n compactification: sum of h(1 : x_i)."""
    return sum(weil_height(normalize((1, v))) for v in x.coords)


def factor_rat(v: Fraction) -> dict[int, int]:
    out = {p: e for p, e in factorize(v.numerator).items()}
    for p, e in factorize(v.denominator).items():
        out[p] = out.get(p, 0) - e
    return out


def prime_support(x: TorusPoint) -> PrimeSupport:
    facs = [factor_rat(v) for v in x.coords]
    primes = tuple(sorted(set().union(*facs)))
    exps = tuple(tuple(f.get(p, 0) for p in primes) for f in facs)
    signs = tuple(1 if v > 0 else -1 for v in x.coords)
    return PrimeSupport(primes, exps, signs)


def max_coord_for_bound(bound: float) -> int:
    """Largest B with log(B) <= bound (up to a 1e-12 slack)."""
    if bound < 0:
        raise ValueError("height bound must be nonnegative")
    if bound > 700:
        raise BoundTooLarge(f"bound {bound} is far beyond any enumerable range")
    b = max(1, int(math.floor(math.exp(bound))))
    while math.log(b + 1) <= bound + _BOUND_SLACK:
        b += 1
    while b > 1 and math.log(b) > bound + _BOUND_SLACK:
        b -= 1
    return b


def estimated_count(n_dim: int, bound: float) -> float:
    b = max_coord_for_bound(bound)
    zeta = sum(k ** -(n_dim + 1.0) for k in range(1, 2000)) if n_dim >= 1 else 1.0
    return (2 * b + 1) ** (n_dim + 1) / (2 * zeta)


def enumerate_points(n_dim: int, bound: float, cap: int = POINT_CAP) -> Iterator[ProjPoint]:
    """Canonical points of P^N(Q) of height <= bound, in lexicographic order."""
    if n_dim < 0:
        raise ValueError("dimension must be nonnegative")
    b = max_coord_for_bound(bound)
    if n_dim == 0:
        yield ProjPoint((1,))
        return
    if estimated_count(n_dim, bound) > cap:
        raise BoundTooLarge(f"~{estimated_count(n_dim, bound):.3g} points exceed cap {cap}")
    free = range(-b, b + 1)

    def rec(k: int, prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        # k coordinates left; prefix is all zeros so far
        if k == 0:
            return
        for lead in range(0, b + 1):
            if lead == 0:
                for tail in rec(k - 1, prefix + (0,)):
                    yield tail
            else:
                for rest in itertools.product(free, repeat=k - 1):
                    yield prefix + (lead,) + rest

    for c in rec(n_dim + 1, ()):
        if reduce(math.gcd, c, 0) == 1:
            yield ProjPoint(c)


def dumps_point(p) -> str:
    return json.dumps(p.to_json())
