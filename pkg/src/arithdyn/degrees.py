"""Dynamical degrees from exact eigen-data, arithmetic degrees from orbits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from . import linalg
from .errors import FactorizationBudgetExceeded, InsufficientTrace, PrecisionUnreachable
from .exact import prime_support
from .factor import factorize
from .maps import (LinearUnipotentMap, MonomialMap, OrbitTrace, ProductMap,
                   ProjectiveMorphism, SelfMap)

BISECTION_CAP = 4000


# ---------------------------------------------------------------- polynomials

@dataclass(frozen=True)
class CharPoly:
    """Monic polynomial, coefficients from the leading 1 down to the constant."""

    coefficients: tuple

    def __post_init__(self):
        c = tuple(Fraction(v) for v in self.coefficients)
        if not c or c[0] != 1:
            raise ValueError("characteristic polynomial must be monic")
        object.__setattr__(self, "coefficients", c)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, t):
        acc = 0
        for c in self.coefficients:
            acc = acc * t + c
        return acc

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coefficients)

    def as_ints(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.coefficients)


def char_poly(a) -> CharPoly:
    """det(tI - A) by Faddeev-LeVerrier over exact rationals."""
    n = len(a)
    if n == 0 or any(len(r) != n for r in a):
        raise ValueError("square matrix required")
    if n > 64:
        raise ValueError("matrices above 64x64 are out of range")
    A = linalg.to_frac(a)
    coeffs = [Fraction(1)]
    M = [[Fraction(0)] * n for _ in range(n)]
    c_prev = Fraction(1)
    for k in range(1, n + 1):
        M = linalg.mat_mul(A, M)
        for i in range(n):
            M[i][i] += c_prev
        AM = linalg.mat_mul(A, M)
        c_prev = -sum(AM[i][i] for i in range(n)) / k
        coeffs.append(c_prev)
    return CharPoly(tuple(coeffs))


def _strip(p: list[Fraction]) -> list[Fraction]:
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def _polyrem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    while len(a) >= len(b) and any(a):
        f = a[0] / b[0]
        for i in range(len(b)):
            a[i] -= f * b[i]
        a = a[1:]
    return _strip(a) if a else [Fraction(0)]


def _polydiv(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    q = []
    while len(a) >= len(b):
        f = a[0] / b[0]
        q.append(f)
        for i in range(len(b)):
            a[i] -= f * b[i]
        a = a[1:]
    return q


def _deriv(p: list[Fraction]) -> list[Fraction]:
    n = len(p) - 1
    return [c * (n - i) for i, c in enumerate(p[:-1])] or [Fraction(0)]


def _gcd(a, b):
    a, b = _strip(a), _strip(b)
    while any(b):
        a, b = b, _polyrem(a, b)
    return [c / a[0] for c in a]


def _horner(p, t):
    acc = 0
    for c in p:
        acc = acc * t + c
    return acc


def _primitive_int(p: list[Fraction]) -> list[int]:
    """Positive multiple of p with coprime integer coefficients (signs unchanged)."""
    den = math.lcm(*(c.denominator for c in p))
    ints = [int(c * den) for c in p]
    g = math.gcd(*ints) or 1
    return [v // g for v in ints]


def _sign_at(p: list[int], t: Fraction) -> int:
    # sign of b^d p(a/b), b > 0, by homogeneous Horner in integers
    a, b = t.numerator, t.denominator
    acc, bpow = p[0], 1
    for c in p[1:]:
        bpow *= b
        acc = acc * a + c * bpow
    return (acc > 0) - (acc < 0)


class Sturm:
    """Sturm chain of a square-free polynomial; counts real roots in (a, b].

    Members are rescaled to primitive integer polynomials, which keeps the
    chain a valid Sturm sequence and makes sign evaluation pure integer work.
    """

    def __init__(self, p: list[Fraction]):
        chain = [p, _deriv(p)]
        while len(chain[-1]) > 1 or chain[-1][0] != 0:
            r = _polyrem(chain[-2], chain[-1])
            if not any(r):
                break
            chain.append([Fraction(v) for v in _primitive_int([-c for c in r])])
        self.chain = [_primitive_int(q) for q in chain]

    def variations(self, t) -> int:
        t = Fraction(t)
        signs = [s for s in (_sign_at(q, t) for q in self.chain) if s]
        return sum(1 for x, y in zip(signs, signs[1:]) if x != y)

    def count(self, a, b) -> int:
        return self.variations(a) - self.variations(b)


def _power_sums(p: CharPoly, upto: int) -> list[Fraction]:
    n = p.degree
    c = p.coefficients
    s = [Fraction(n)]
    for k in range(1, upto + 1):
        acc = Fraction(0)
        for i in range(1, min(k - 1, n) + 1):
            acc -= c[i] * s[k - i]
        if k <= n:
            acc -= k * c[k]
        s.append(acc)
    return s


def modulus_product_poly(p: CharPoly) -> list[Fraction]:
    """Polynomial whose roots are lambda_i * lambda_j (i <= j) over the roots of p.

    Its largest real root is rho^2: every root has modulus at most rho^2, and
    lambda * conj(lambda) = rho^2 is one of them for a root of maximal modulus.
    """
    n = p.degree
    deg = n * (n + 1) // 2
    s = _power_sums(p, 2 * deg)
    P = [Fraction(0)] + [(s[k] ** 2 + s[2 * k]) / 2 for k in range(1, deg + 1)]
    e = [Fraction(1)]
    for k in range(1, deg + 1):
        e.append(sum((-1) ** (i - 1) * e[k - i] * P[i] for i in range(1, k + 1)) / k)
    return [(-1) ** k * e[k] for k in range(deg + 1)]



def _divisors(n: int) -> list[int]:
    divs = [1]
    for q, e in factorize(n).items():
        divs = [d * q ** k for d in divs for k in range(e + 1)]
    return divs


def _rational_root_moduli(p: CharPoly) -> list[int]:
    """|r| for integer roots r of an integral monic p (empty when not integral)."""
    if not p.is_integral():
        return []
    c = list(p.as_ints())
    out = []
    while len(c) > 1 and c[-1] == 0:
        out.append(0)
        c.pop()
    if len(c) == 1:
        return out
    try:
        divs = _divisors(c[-1])
    except FactorizationBudgetExceeded:
        return out
    for d in divs:
        for r in (d, -d):
            if _horner(c, r) == 0:
                out.append(d)
    return out


def _sqrt_bounds(r: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    if r <= 0:
        return Fraction(0), Fraction(0)
    scale = 4 ** bits
    num, den = r.numerator * scale, r.denominator
    lo_int = math.isqrt(num // den)
    lo = Fraction(lo_int, 2 ** bits)
    if lo * lo == r:
        return lo, lo
    return lo, Fraction(lo_int + 1, 2 ** bits)


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)

    @property
    def lo_float(self) -> float:
        v = float(self.lo)
        return math.nextafter(v, -math.inf) if Fraction(v) > self.lo else v

    @property
    def hi_float(self) -> float:
        v = float(self.hi)
        return math.nextafter(v, math.inf) if Fraction(v) < self.hi else v

    def contains(self, x) -> bool:
        return self.lo <= Fraction(x) <= self.hi

    def is_exact(self) -> bool:
        return self.lo == self.hi

    def square(self) -> "Interval":
        return Interval(self.lo * self.lo, self.hi * self.hi)

    def overlaps(self, other: "Interval", slack=0) -> bool:
        slack = Fraction(slack)
        return self.lo - slack <= other.hi and other.lo - slack <= self.hi


def _seeded_enclosure(p: CharPoly, sturm: Sturm, upper: Fraction, prec: Fraction) -> Interval | None:
    """Interval around a floating-point guess, accepted only if Sturm counts confirm it."""
    import numpy as np

    try:
        guess = float(max(abs(np.roots([float(c) for c in p.coefficients]))))
    except (OverflowError, ValueError, np.linalg.LinAlgError):
        return None
    if not math.isfinite(guess) or guess <= 0:
        return None
    r = Fraction(guess).limit_denominator(10**6)
    sq = sturm.chain[0]
    if _sign_at(sq, r * r) == 0 and sturm.count(r * r, upper) == 0:
        return Interval(r, r)
    half = prec / 4
    # snap to a dyadic grid well below the tolerance: reports stay byte-stable
    # even if the float guess differs in its last bits between platforms
    k = math.ceil(-math.log2(float(prec))) + 4
    centre = Fraction(round(guess * 2 ** k), 2 ** k)
    lo = max(Fraction(0), centre - half)
    hi = centre + half
    # a root of the modulus polynomial in (lo^2, hi^2] and none above hi^2
    if sturm.count(hi * hi, upper) == 0 and sturm.count(lo * lo, hi * hi) >= 1:
        return Interval(lo, hi)
    return None


def spectral_radius(p: CharPoly, precision: float = 1e-9) -> Interval:
    """Certified enclosure of max |root of p| of width <= precision."""
    if precision <= 0:
        raise ValueError("precision must be positive")
    prec = Fraction(precision)
    if p.degree == 0:
        return Interval(Fraction(0), Fraction(0))
    if p.degree == 1:
        r = abs(p.coefficients[1])
        return Interval(r, r)
    q = modulus_product_poly(p)
    sq = _polydiv(q, _gcd(q, _deriv(q))) if p.degree > 0 else q
    sq = [c / sq[0] for c in sq]
    sturm = Sturm(sq)
    upper = 1 + max(abs(c) for c in sq[1:])
    if sturm.count(Fraction(0), upper) == 0:
        return Interval(Fraction(0), Fraction(0))
    # exact answer when a rational root attains the spectral radius
    cands = _rational_root_moduli(p)
    if cands:
        r = Fraction(max(cands))
        if r > 0 and sturm.count(r * r, upper) == 0:
            return Interval(r, r)
    seeded = _seeded_enclosure(p, sturm, upper, prec)
    if seeded is not None:
        return seeded
    lo, hi = Fraction(0), upper
    bits = max(8, int(-math.log2(precision)) + 8)
    for _ in range(BISECTION_CAP):
        slo, _ = _sqrt_bounds(lo, bits)
        _, shi = _sqrt_bounds(hi, bits)
        if shi - slo <= prec:
            return Interval(slo, shi)
        mid = (lo + hi) / 2
        # keep dyadic endpoints short
        mid = Fraction(round(mid * 2 ** bits * 4), 2 ** bits * 4) if mid.denominator > 2 ** (bits + 2) else mid
        if not lo < mid < hi:
            mid = (lo + hi) / 2
        if sturm.count(mid, upper) >= 1:
            lo = mid
        else:
            if _horner(sq, mid) == 0:
                r_lo, r_hi = _sqrt_bounds(mid, bits)
                if r_hi - r_lo <= prec:
                    return Interval(r_lo, r_hi)
            hi = mid
    raise PrecisionUnreachable(f"bisection cap hit before width {precision}")


# ---------------------------------------------------------------- dynamical degree

@dataclass
class DegreeReport:
    interval: Interval
    method: str
    witness: str = ""

    @property
    def delta_lower(self) -> float:
        return self.interval.lo_float

    @property
    def delta_upper(self) -> float:
        return self.interval.hi_float

    @property
    def midpoint(self) -> float:
        return self.interval.mid

    def to_json(self) -> dict:
        return {"delta_lower": repr(self.delta_lower), "delta_upper": repr(self.delta_upper),
                "exact": self.interval.is_exact(), "method": self.method,
                "witness": self.witness}


def dynamical_degree(f: SelfMap, precision: float = 1e-9) -> DegreeReport:
    kind = getattr(f, "kind", None)
    if isinstance(f, ProjectiveMorphism):
        d = Fraction(f.degree)
        return DegreeReport(Interval(d, d), "exact-degree", f"f*H = {f.degree}H on N^1(P^{f.N})")
    if isinstance(f, MonomialMap):
        cp = char_poly(f.A)
        return DegreeReport(spectral_radius(cp, precision), "spectral-radius",
                            f"charpoly {_fmt_poly(cp)}")
    if isinstance(f, LinearUnipotentMap):
        return DegreeReport(Interval(Fraction(1), Fraction(1)), "exact-degree",
                            "linear automorphism of P^n acts trivially on N^1")
    if isinstance(f, ProductMap):
        reps = [dynamical_degree(g, precision) for g in f.components]
        iv = Interval(max(r.interval.lo for r in reps), max(r.interval.hi for r in reps))
        return DegreeReport(iv, "product-max", "; ".join(r.witness for r in reps))
    if kind == "toric":
        M = f.pullback_matrix()
        cp = char_poly(M)
        return DegreeReport(spectral_radius(cp, precision), "toric-pullback",
                            f"f* = {[[str(v) for v in row] for row in M]}, charpoly {_fmt_poly(cp)}")
    raise TypeError(f"no degree rule for {type(f).__name__}")


def _fmt_poly(p: CharPoly) -> str:
    n = p.degree
    terms = []
    for i, c in enumerate(p.coefficients):
        if c == 0:
            continue
        e = n - i
        mono = "" if e == 0 else ("t" if e == 1 else f"t^{e}")
        coef = str(c) if (abs(c) != 1 or e == 0) else ("-" if c < 0 else "")
        terms.append(f"{coef}{mono}")
    return " + ".join(terms).replace("+ -", "- ")


# ---------------------------------------------------------------- arithmetic degree

@dataclass
class AlphaEstimate:
    root_sequence: list[float]
    ratio_sequence: list[float]
    point_value: float | None
    converged: bool
    window: int
    tolerance: float
    truncated: bool = False

    @property
    def root_value(self) -> float:
        return self.root_sequence[-1]

    def to_json(self) -> dict:
        return {"point_value": None if self.point_value is None else repr(self.point_value),
                "converged": self.converged, "window": self.window,
                "tolerance": repr(self.tolerance), "iterates": len(self.ratio_sequence),
                "truncated": self.truncated,
                "root_last": repr(self.root_sequence[-1]),
                "ratio_tail": [repr(v) for v in self.ratio_sequence[-self.window:]]}


def arithmetic_degree(trace: OrbitTrace, tolerance: float = 1e-3, window: int = 5) -> AlphaEstimate:
    """Root and ratio estimators of the growth rate of max(1, h(f^n x))."""
    hs = [max(1.0, h) for h in trace.heights]
    if len(hs) < window + 2:
        raise InsufficientTrace(f"trace has {len(hs)} points, need {window + 2}")
    roots = [hs[n] ** (1.0 / n) for n in range(1, len(hs))]
    ratios = [hs[n + 1] / hs[n] for n in range(len(hs) - 1)]
    tail = ratios[-window:]
    converged = max(tail) - min(tail) <= tolerance
    value = math.fsum(tail) / window if converged else None
    return AlphaEstimate(roots, ratios, value, converged, window, tolerance, trace.truncated)


@dataclass(frozen=True)
class EigenMatch:
    value: float
    gap: float
    violation: bool


def eigenvalue_match(alpha: AlphaEstimate, spectrum: Sequence[float],
                     report: DegreeReport | None = None) -> EigenMatch:
    """Nearest pullback-eigenvalue modulus to the converged arithmetic degree.

    The modulus 1 is always a candidate: preperiodic orbits have alpha = 1
    whether or not 1 is an eigenvalue of f*.
    """
    if not alpha.converged:
        raise InsufficientTrace("eigenvalue matching needs a converged estimate")
    mods = [*spectrum, 1.0]
    if report is not None:
        mods.append(report.midpoint)
    best = min(mods, key=lambda m: (abs(alpha.point_value - m), m))
    gap = abs(alpha.point_value - best)
    return EigenMatch(best, gap, gap > 10 * alpha.tolerance)


# ---------------------------------------------------------------- density heuristic

def _eventually_periodic(seq: list, max_period: int = 6) -> bool:
    half = len(seq) // 2
    for p in range(1, max_period + 1):
        if all(seq[k] == seq[k + p] for k in range(half, len(seq) - p)):
            return True
    return False


def density_heuristic(f: SelfMap, x, steps: int = 12, box: int = 3) -> str:
    """'Dense-Heuristic', 'Not-Dense' (finite orbit found) or 'Inconclusive'.

    Never certifies density. For monomial maps every character chi_m with
    ||m||_inf <= box must be non-periodic along the orbit.
    """
    seen = {}
    y = x
    for k in range(steps + 1):
        key = y
        try:
            hash(key)
        except TypeError:
            key = repr(f.point_json(y))
        if key in seen:
            return "Not-Dense"
        seen[key] = k
        y = f.evaluate(y)
    if isinstance(f, ProjectiveMorphism) and f.N == 1:
        return "Dense-Heuristic"
    A = getattr(f, "monomial_matrix", None)
    A = A() if callable(A) else (f.A if isinstance(f, MonomialMap) else None)
    if A is None:
        return "Inconclusive"
    try:
        sup = prime_support(x)
    except FactorizationBudgetExceeded:
        return "Inconclusive"
    n = len(A)
    # exponent vectors per coordinate and signs, propagated exactly by A
    expo = [list(row) for row in sup.exponents]
    signs = list(sup.signs)
    orbit = []
    for _ in range(steps + 1):
        orbit.append((tuple(signs), [tuple(r) for r in expo]))
        expo = [[sum(A[i][j] * expo[j][q] for j in range(n)) for q in range(len(sup.primes))]
                for i in range(n)]
        signs = [math.prod(signs[j] ** (A[i][j] % 2) for j in range(n)) for i in range(n)]
    for m in product(range(-box, box + 1), repeat=n):
        if not any(m):
            continue
        seq = []
        for sg, ex in orbit:
            sign = math.prod(sg[j] ** (m[j] % 2) for j in range(n))
            vec = tuple(sum(m[j] * ex[j][q] for j in range(n)) for q in range(len(sup.primes)))
            seq.append((sign, vec))
        if _eventually_periodic(seq):
            return "Inconclusive"
    return "Dense-Heuristic"
