"""Self-map families, exact evaluation, iteration and composition.

Every map exposes the same small protocol (``evaluate``, ``height``,
``power``, ``bits``, ``parse_point``, ``point_json``, ``descriptor``) so the
orbit, degree and height code can stay variant-agnostic.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Any, Sequence

from . import linalg
from .errors import (ArithDynError, DegenerateImage, DegreeOverflow,
                     DomainViolation, OrbitError, SpecError)
from .exact import (AllZero, gcd_all, monomial, mpz, trusted_point, ProjPoint, TorusPoint, as_rat, enumerate_points,
                    normalize, torus_height, weil_height)

DEGREE_CAP = 4096
BIT_BUDGET = 10**7

Poly = dict  # {exponent tuple: Fraction}


# ---------------------------------------------------------------- polynomials

def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for ea, ca in p.items():
        for eb, cb in q.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def poly_add(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0) + c
    return {e: c for e, c in out.items() if c != 0}


def poly_pow(p: Poly, n: int, nvars: int) -> Poly:
    result: Poly = {(0,) * nvars: Fraction(1)}
    base = p
    while n:
        if n & 1:
            result = poly_mul(result, base)
        n >>= 1
        if n:
            base = poly_mul(base, base)
    return result


def poly_compose(outer: Sequence[Poly], inner: Sequence[Poly]) -> list[Poly]:
    """outer_i(inner_0, ..., inner_N) for every i."""
    nvars = len(next(iter(inner[0])))
    cache: dict[tuple[int, int], Poly] = {}

    def power(j: int, e: int) -> Poly:
        if (j, e) not in cache:
            cache[(j, e)] = poly_pow(inner[j], e, nvars)
        return cache[(j, e)]

    out = []
    for poly in outer:
        acc: Poly = {}
        for exps, c in poly.items():
            term: Poly = {(0,) * nvars: Fraction(c)}
            for j, e in enumerate(exps):
                if e:
                    term = poly_mul(term, power(j, e))
            acc = poly_add(acc, term)
        out.append(acc)
    return out


# ---------------------------------------------------------------- base protocol

class SelfMap:
    kind = "abstract"

    def evaluate(self, x):
        raise NotImplementedError

    def height(self, x) -> float:
        raise NotImplementedError

    def power(self, n: int) -> "SelfMap":
        raise NotImplementedError

    def bits(self, x) -> int:
        return x.bits()

    def parse_point(self, data):
        raise NotImplementedError

    def point_json(self, x):
        return x.to_json()

    def descriptor(self) -> dict:
        raise NotImplementedError

    def pullback_spectrum(self) -> list[float]:
        """Moduli of the eigenvalues of f* (diagnostic, floating point)."""
        raise NotImplementedError


# ---------------------------------------------------------------- P^N morphisms

@dataclass(frozen=True, eq=False)
class ProjectiveMorphism(SelfMap):
    """Morphism of P^N given by N+1 homogeneous forms of common degree d.

    ``polys[i]`` is a tuple of ``(coefficient, exponent tuple)`` terms.
    """

    N: int
    polys: tuple
    kind = "projective"

    def __post_init__(self):
        polys = tuple(
            tuple(sorted(((as_rat(c), tuple(int(e) for e in exps)) for c, exps in poly
                          if as_rat(c) != 0), key=lambda t: t[1], reverse=True))
            for poly in self.polys)
        object.__setattr__(self, "polys", polys)
        if len(polys) != self.N + 1:
            raise SpecError(f"P^{self.N} morphism needs {self.N + 1} forms, got {len(polys)}")
        degrees = set()
        for poly in polys:
            if not poly:
                raise SpecError("a zero form cannot define a morphism")
            for _, exps in poly:
                if len(exps) != self.N + 1 or min(exps) < 0:
                    raise SpecError(f"bad exponent vector {exps}")
                degrees.add(sum(exps))
        if len(degrees) != 1:
            raise SpecError(f"forms are not homogeneous of one degree: {sorted(degrees)}")
        if degrees.pop() < 1:
            raise SpecError("degree must be at least 1")

    @property
    def degree(self) -> int:
        return sum(self.polys[0][0][1])

    @classmethod
    def from_dicts(cls, N: int, dicts: Sequence[Poly]) -> "ProjectiveMorphism":
        return cls(N, tuple(tuple((c, e) for e, c in d.items()) for d in dicts))

    @classmethod
    def power_map(cls, N: int, d: int) -> "ProjectiveMorphism":
        """(x_0^d : ... : x_N^d)."""
        return cls(N, tuple(((1, tuple(d * (i == j) for j in range(N + 1))),)
                            for i in range(N + 1)))

    @classmethod
    def identity(cls, N: int) -> "ProjectiveMorphism":
        return cls.power_map(N, 1)

    def as_dicts(self) -> list[Poly]:
        return [{e: c for c, e in poly} for poly in self.polys]

    @cached_property
    def _int_polys(self):
        # forms scaled by a common denominator: same projective map, integer arithmetic
        den = reduce(math.lcm, (c.denominator for poly in self.polys for c, _ in poly), 1)
        return [[(int(c * den), exps) for c, exps in poly] for poly in self.polys]

    @cached_property
    def _gcd_seed(self) -> int:
        # on P^1, gcd(F(x, y), G(x, y)) divides Res(F, G) for coprime x, y
        if self.N != 1:
            return 0
        F, G = self._int_polys
        return abs(int(binary_resultant(F, G, self.degree, self.degree)))

    def evaluate(self, x: ProjPoint) -> ProjPoint:
        if len(x.coords) != self.N + 1:
            raise DomainViolation(f"point {x} is not in P^{self.N}")
        pw: dict[tuple[int, int], int] = {}
        xs = [mpz(v) for v in x.coords]
        vals = []
        for poly in self._int_polys:
            s = 0
            for c, exps in poly:
                m = c
                for j, e in enumerate(exps):
                    if e:
                        key = (j, e)
                        if key not in pw:
                            pw[key] = xs[j] ** e
                        m *= pw[key]
                        if not m:
                            break
                s += m
            vals.append(s)
        g = gcd_all([self._gcd_seed, *vals])
        if g == 0:
            raise DegenerateImage(f"all forms vanish at {x}")
        if next(v for v in vals if v) < 0:
            g = -g
        return trusted_point(tuple(int(v // g) for v in vals))

    def height(self, x: ProjPoint) -> float:
        return weil_height(x)

    def compose(self, inner: "ProjectiveMorphism") -> "ProjectiveMorphism":
        """self o inner."""
        return ProjectiveMorphism.from_dicts(self.N, poly_compose(self.as_dicts(), inner.as_dicts()))

    def power(self, n: int, degree_cap: int = DEGREE_CAP) -> "ProjectiveMorphism":
        if n < 1:
            raise ValueError("power must be >= 1")
        if self.degree ** n > degree_cap:
            raise DegreeOverflow(f"degree {self.degree}^{n} exceeds cap {degree_cap}")
        result, base, k = None, self, n
        while k:
            if k & 1:
                result = base if result is None else result.compose(base)
            k >>= 1
            if k:
                base = base.compose(base)
        return result

    def height_upper_constant(self) -> float:
        """C with h(f(x)) <= d h(x) + C for every x (triangle inequality)."""
        den = reduce(math.lcm, (c.denominator for poly in self.polys for c, _ in poly), 1)
        worst = max(sum(abs(c * den) for c, _ in poly) for poly in self.polys)
        return math.log(worst)

    def parse_point(self, data) -> ProjPoint:
        p = ProjPoint.from_json(data)
        if p.dim != self.N:
            raise SpecError(f"point {p} is not in P^{self.N}")
        return p

    def descriptor(self) -> dict:
        return {"kind": "projective", "N": self.N, "degree": self.degree,
                "polys": [[[str(c), list(e)] for c, e in poly] for poly in self.polys]}

    def pullback_spectrum(self) -> list[float]:
        return [float(self.degree)]

    def is_power_map(self) -> bool:
        d = self.degree
        return all(len(p) == 1 and p[0][1] == tuple(d * (i == j) for j in range(self.N + 1))
                   for i, p in enumerate(self.polys))


@dataclass(frozen=True)
class MorphismCertificate:
    status: str  # "Certified" | "HeuristicPass" | "Fail"
    resultant: Fraction | None = None
    witness: ProjPoint | None = None
    detail: str = ""


def _binary_coeffs(poly, d):
    """Coefficients of a binary form, x-degree descending."""
    c = [Fraction(0)] * (d + 1)
    for coef, (i, j) in poly:
        c[d - i] += coef
    return c


def binary_resultant(f_poly, g_poly, d: int, e: int) -> Fraction:
    a = _binary_coeffs(f_poly, d)
    b = _binary_coeffs(g_poly, e)
    size = d + e
    rows = []
    for i in range(e):
        rows.append([Fraction(0)] * i + a + [Fraction(0)] * (size - d - 1 - i))
    for i in range(d):
        rows.append([Fraction(0)] * i + b + [Fraction(0)] * (size - e - 1 - i))
    return linalg.det(rows)


def check_morphism(f: ProjectiveMorphism, bound: float = math.log(3), samples: int = 200,
                   seed: int = 0) -> MorphismCertificate:
    """Certify that the forms of ``f`` have no common zero.

    Exact (Sylvester resultant) on P^1. On P^N, N >= 2, only a heuristic:
    evaluation on all points of small height plus random points.
    """
    if f.N == 1:
        res = binary_resultant(f.polys[0], f.polys[1], f.degree, f.degree)
        if res != 0:
            return MorphismCertificate("Certified", res, detail="Sylvester resultant nonzero")
        witness = None
        for p in enumerate_points(1, math.log(10)):
            try:
                f.evaluate(p)
            except DegenerateImage:
                witness = p
                break
        return MorphismCertificate("Fail", res, witness, "resultant vanishes")
    rng = random.Random(seed)
    candidates = list(enumerate_points(f.N, bound))
    for _ in range(samples):
        candidates.append(normalize([rng.randint(-10**6, 10**6) or 1 for _ in range(f.N + 1)]))
    for p in candidates:
        try:
            f.evaluate(p)
        except DegenerateImage:
            return MorphismCertificate("Fail", None, p, "common rational zero found")
    return MorphismCertificate("HeuristicPass", None, None,
                               f"no common zero among {len(candidates)} test points (heuristic)")


# ---------------------------------------------------------------- torus maps

def _check_square(a, name):
    if not a or any(len(row) != len(a) for row in a):
        raise SpecError(f"{name} must be a nonempty square matrix")


@dataclass(frozen=True, eq=False)
class MonomialMap(SelfMap):
    """x -> (prod_j x_j^{A_ij})_i on G_m^n."""

    A: tuple
    kind = "monomial"

    def __post_init__(self):
        a = tuple(tuple(int(v) for v in row) for row in self.A)
        _check_square(a, "A")
        object.__setattr__(self, "A", a)
        if linalg.det(a) == 0:
            raise SpecError("monomial map matrix must be invertible over Q")

    @property
    def n(self) -> int:
        return len(self.A)

    def evaluate(self, x: TorusPoint) -> TorusPoint:
        if not isinstance(x, TorusPoint):
            raise DomainViolation("monomial maps act on torus points")
        if x.n != self.n:
            raise DomainViolation(f"torus point has {x.n} coordinates, map needs {self.n}")
        return TorusPoint(tuple(monomial(x.coords, row) for row in self.A))

    def height(self, x: TorusPoint) -> float:
        return torus_height(x)

    def height_bound(self, x: TorusPoint) -> float:
        """sum_ij |A_ij| h(1 : x_j), an upper bound for the height of f(x)."""
        hs = [weil_height(normalize((1, v))) for v in x.coords]
        return sum(abs(a) * h for row in self.A for a, h in zip(row, hs))

    def power(self, n: int) -> "MonomialMap":
        if n < 1:
            raise ValueError("power must be >= 1")
        return MonomialMap(linalg.mat_pow([list(r) for r in self.A], n))

    def parse_point(self, data) -> TorusPoint:
        x = TorusPoint.from_json(data)
        if x.n != self.n:
            raise SpecError(f"torus point {data} has wrong length for n={self.n}")
        return x

    def descriptor(self) -> dict:
        return {"kind": "monomial", "A": [list(r) for r in self.A]}

    def pullback_spectrum(self) -> list[float]:
        return eigen_moduli(self.A)


@dataclass(frozen=True)
class AffinePoint:
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(as_rat(v) for v in self.coords))

    def bits(self) -> int:
        return sum(v.numerator.bit_length() + v.denominator.bit_length() for v in self.coords)

    def to_json(self) -> list[str]:
        return [str(v) for v in self.coords]


@dataclass(frozen=True, eq=False)
class LinearUnipotentMap(SelfMap):
    """x -> L x on affine n-space, heights via P^n = {(1 : x)}."""

    L: tuple
    kind = "unipotent"

    def __post_init__(self):
        m = tuple(tuple(as_rat(v) for v in row) for row in self.L)
        _check_square(m, "L")
        object.__setattr__(self, "L", m)
        if linalg.det(m) == 0:
            raise SpecError("linear map must be invertible")

    @property
    def n(self) -> int:
        return len(self.L)

    def is_unipotent(self) -> bool:
        n = self.n
        nil = [[self.L[i][j] - (i == j) for j in range(n)] for i in range(n)]
        return not any(v for row in linalg.mat_pow(nil, n) for v in row)

    def evaluate(self, x: AffinePoint) -> AffinePoint:
        if len(x.coords) != self.n:
            raise DomainViolation("affine point has wrong dimension")
        return AffinePoint(tuple(linalg.mat_vec(self.L, x.coords)))

    def height(self, x: AffinePoint) -> float:
        return weil_height(normalize((1,) + x.coords))

    def power(self, n: int) -> "LinearUnipotentMap":
        if n < 1:
            raise ValueError("power must be >= 1")
        return LinearUnipotentMap(linalg.mat_pow([list(r) for r in self.L], n))

    def parse_point(self, data) -> AffinePoint:
        x = AffinePoint(tuple(as_rat(v) for v in data))
        if len(x.coords) != self.n:
            raise SpecError("affine point has wrong dimension")
        return x

    def descriptor(self) -> dict:
        return {"kind": "unipotent", "L": [[str(v) for v in r] for r in self.L]}

    def pullback_spectrum(self) -> list[float]:
        # an automorphism of P^n acts trivially on N^1 = Z
        return [1.0]


# ---------------------------------------------------------------- products

@dataclass(frozen=True, eq=False)
class ProductMap(SelfMap):
    """f_1 x ... x f_k acting on tuples of component states.

    ``height_mode`` picks the height on the product: ``"max"`` (default) of the
    component heights or their ``"sum"``. The two are within a factor of k of
    each other, so every growth rate is the same for both.
    """

    components: tuple
    height_mode: str = "max"
    kind = "product"

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise SpecError("product needs at least one component")
        if self.height_mode not in ("max", "sum"):
            raise SpecError(f"unknown height_mode {self.height_mode!r}")

    def _check(self, x):
        if not isinstance(x, tuple) or len(x) != len(self.components):
            raise DomainViolation("product state must be a tuple matching the components")

    def evaluate(self, x: tuple) -> tuple:
        self._check(x)
        return tuple(f.evaluate(xi) for f, xi in zip(self.components, x))

    def component_heights(self, x: tuple) -> list[float]:
        return [f.height(xi) for f, xi in zip(self.components, x)]

    def height(self, x: tuple) -> float:
        hs = self.component_heights(x)
        return max(hs) if self.height_mode == "max" else sum(hs)

    def bits(self, x: tuple) -> int:
        return sum(f.bits(xi) for f, xi in zip(self.components, x))

    def power(self, n: int) -> "ProductMap":
        return ProductMap(tuple(f.power(n) for f in self.components), self.height_mode)

    def parse_point(self, data) -> tuple:
        if len(data) != len(self.components):
            raise SpecError("product point needs one entry per component")
        return tuple(f.parse_point(d) for f, d in zip(self.components, data))

    def point_json(self, x):
        return [f.point_json(xi) for f, xi in zip(self.components, x)]

    def descriptor(self) -> dict:
        d: dict[str, Any] = {"kind": "product",
                             "components": [f.descriptor() for f in self.components]}
        if self.height_mode != "max":
            d["height_mode"] = self.height_mode
        return d

    def pullback_spectrum(self) -> list[float]:
        out: list[float] = []
        for f in self.components:
            out.extend(f.pullback_spectrum())
        return out


def eigen_moduli(a) -> list[float]:
    import numpy as np

    vals = np.linalg.eigvals(np.array([[float(v) for v in row] for row in a]))
    return sorted(float(abs(v)) for v in vals)


# ---------------------------------------------------------------- operations

def evaluate(f: SelfMap, x):
    return f.evaluate(x)


def compose_power(f: SelfMap, n: int, **kw) -> SelfMap:
    if n == 1:
        return f
    return f.power(n, **kw) if kw else f.power(n)


@dataclass
class OrbitTrace:
    points: list
    heights: list[float]
    bit_sizes: list[int]
    truncated: bool = False

    def __len__(self):
        return len(self.points)

    @property
    def iterates(self) -> int:
        return len(self.points) - 1


def iterate_orbit(f: SelfMap, x, max_iters: int, bit_budget: int = BIT_BUDGET) -> OrbitTrace:
    """Exact orbit x, f(x), ..., stopping early once the stored bits would
    exceed ``bit_budget`` (the trace is then flagged ``truncated``)."""
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    b0 = f.bits(x)
    trace = OrbitTrace([x], [f.height(x)], [b0])
    total = b0
    for k in range(1, max_iters + 1):
        try:
            x = f.evaluate(x)
        except ArithDynError as exc:
            raise OrbitError(k, exc) from exc
        b = f.bits(x)
        if total + b > bit_budget:
            trace.truncated = True
            break
        total += b
        trace.points.append(x)
        trace.heights.append(f.height(x))
        trace.bit_sizes.append(b)
    return trace
