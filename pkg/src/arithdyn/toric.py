"""Complete simplicial toric varieties: class groups, nef cones, endomorphisms,
semi-ample fibrations and the heights they carry.

Sign convention, fixed everywhere: a T-divisor D = sum_rho a_rho D_rho has
support function psi_D with psi_D(u_rho) = -a_rho, linear on each cone, and
polytope P_D = {m : <m, u_rho> >= -a_rho}.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from itertools import combinations, product
from typing import Sequence

from . import linalg
from .errors import (ConjugacyFailure, EmptyPolytope, IncompatibleEndo,
                     NotComplete, NotNef, NotPermutation, SpecError)
from .exact import ProjPoint, TorusPoint, monomial, normalize, weil_height
from .maps import MonomialMap, SelfMap, eigen_moduli

MAX_CLASS_RANK = 12
MAX_RAYS = 64
LATTICE_CANDIDATE_CAP = 10**5


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


# ---------------------------------------------------------------- fans

@dataclass(frozen=True, eq=False)
class Fan:
    """Complete simplicial fan; validated on construction."""

    rank: int
    rays: tuple
    cones: tuple
    check_samples: int = 256

    def __post_init__(self):
        rays = tuple(tuple(int(v) for v in r) for r in self.rays)
        cones = tuple(tuple(sorted(int(i) for i in c)) for c in self.cones)
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "cones", cones)
        n = self.rank
        if n < 1:
            raise SpecError("fan rank must be positive")
        if len(rays) > MAX_RAYS:
            raise SpecError(f"more than {MAX_RAYS} rays")
        for r in rays:
            if len(r) != n:
                raise SpecError(f"ray {r} does not have length {n}")
            if reduce(math.gcd, r, 0) != 1:
                raise SpecError(f"ray {r} is not primitive")
        if len(set(rays)) != len(rays):
            raise SpecError("duplicate rays")
        if len(rays) - n > MAX_CLASS_RANK:
            raise SpecError(f"class rank above {MAX_CLASS_RANK}")
        for c in cones:
            if any(i < 0 or i >= len(rays) for i in c):
                raise SpecError(f"cone {c} references a missing ray")
            if len(c) != n:
                raise NotComplete(f"maximal cone {c} is not full-dimensional")
            if linalg.rank([rays[i] for i in c]) != n:
                raise SpecError(f"cone {c} is not simplicial")
        used = set().union(*map(set, cones)) if cones else set()
        if used != set(range(len(rays))):
            raise SpecError("every ray must lie in some maximal cone")
        self._check_complete()

    # -- validation
    def _check_complete(self):
        n = self.rank
        facets: dict[tuple, int] = {}
        for c in self.cones:
            for f in combinations(c, n - 1):
                facets[f] = facets.get(f, 0) + 1
        bad = [f for f, k in facets.items() if k != 2]
        if bad:
            raise NotComplete(f"facet {bad[0]} lies on {facets[bad[0]]} maximal cone(s), need 2")
        rng = random.Random(1729)
        for _ in range(self.check_samples):
            v = [rng.randint(-10**6, 10**6) for _ in range(n)]
            inside = [i for i in range(len(self.cones)) if self._coeffs(i, v) is not None
                      and all(x > 0 for x in self._coeffs(i, v))]
            if len(inside) != 1:
                raise NotComplete(f"direction {v} lies in {len(inside)} cone interiors")

    @cached_property
    def _inverses(self):
        # columns = rays of the cone; coefficients of v are inv @ v
        return [linalg.inverse(linalg.transpose([self.rays[i] for i in c])) for c in self.cones]

    def _coeffs(self, cone_idx: int, v):
        return linalg.mat_vec(self._inverses[cone_idx], v)

    def cone_containing(self, v) -> int:
        for i in range(len(self.cones)):
            if all(x >= 0 for x in self._coeffs(i, v)):
                return i
        raise NotComplete(f"no cone contains {v}")

    def in_cone(self, cone_idx: int, v) -> bool:
        return all(x >= 0 for x in self._coeffs(cone_idx, v))

    def cone_of_ray(self, rho: int) -> int:
        return next(i for i, c in enumerate(self.cones) if rho in c)

    def walls(self):
        """(sigma, sigma', ray of sigma' opposite the shared facet) per codim-1 cone."""
        n = self.rank
        owner: dict[tuple, list[int]] = {}
        for i, c in enumerate(self.cones):
            for f in combinations(c, n - 1):
                owner.setdefault(f, []).append(i)
        out = []
        for f, (i, j) in sorted(owner.items()):
            opp = next(r for r in self.cones[j] if r not in f)
            out.append((f, i, j, opp))
        return out

    # -- support functions
    def m_sigma(self, a: Sequence, cone_idx: int) -> list[Fraction]:
        """The m with <m, u_rho> = -a_rho on the rays of the cone."""
        c = self.cones[cone_idx]
        # inverse maps v to ray coefficients: v = sum coeff_j u_j; so <m, v> = sum coeff_j <m,u_j>
        inv = self._inverses[cone_idx]
        vals = [-Fraction(a[r]) for r in c]
        # m = inv^T vals
        return [sum(inv[j][k] * vals[j] for j in range(len(c))) for k in range(self.rank)]

    def psi(self, a: Sequence, v) -> Fraction:
        i = self.cone_containing(v)
        return _dot(self.m_sigma(a, i), v)

    def to_json(self) -> dict:
        return {"rank": self.rank, "rays": [list(r) for r in self.rays],
                "cones": [list(c) for c in self.cones]}

    @classmethod
    def from_json(cls, data) -> "Fan":
        if isinstance(data, str):
            with open(data, encoding="utf-8") as fh:
                data = json.load(fh)
        try:
            return cls(int(data["rank"]), data["rays"], data["cones"])
        except KeyError as exc:
            raise SpecError(f"fan descriptor missing {exc}") from None


def fan_projective_space(n: int) -> Fan:
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)] + [tuple([-1] * n)]
    cones = [tuple(j for j in range(n + 1) if j != i) for i in range(n + 1)]
    return Fan(n, rays, cones)


def fan_p1_product(n: int) -> Fan:
    """(P^1)^n with rays e_1, -e_1, e_2, -e_2, ..."""
    rays = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        rays.append(tuple(e))
        rays.append(tuple(-x for x in e))
    cones = [tuple(2 * i + s[i] for i in range(n)) for s in product((0, 1), repeat=n)]
    return Fan(n, rays, cones)


def fan_hirzebruch(a: int) -> Fan:
    return Fan(2, [(1, 0), (0, 1), (-1, a), (0, -1)], [(0, 1), (1, 2), (2, 3), (3, 0)])


# ---------------------------------------------------------------- class group

@dataclass(frozen=True)
class TDivisor:
    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(Fraction(v) for v in self.coefficients))

    def __add__(self, other):
        return TDivisor(tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def scale(self, c):
        return TDivisor(tuple(Fraction(c) * a for a in self.coefficients))

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.coefficients)


@dataclass(frozen=True)
class ClassLattice:
    """Z^rays modulo the principal divisors div(chi^m) = (<m, u_rho>)_rho.

    ``basis_rays`` are the non-pivot columns of the Hermite normal form of the
    relation matrix; their divisor classes form a basis of N^1 over Q.
    """

    relations: tuple
    hnf: tuple
    pivots: tuple
    basis_rays: tuple
    rref_rows: tuple

    @property
    def rank(self) -> int:
        return len(self.basis_rays)

    def to_class(self, a: Sequence) -> tuple[Fraction, ...]:
        v = [Fraction(x) for x in a]
        for row, p in zip(self.rref_rows, self.pivots):
            if v[p]:
                f = v[p]
                v = [x - f * y for x, y in zip(v, row)]
        return tuple(v[r] for r in self.basis_rays)

    def from_class(self, c: Sequence, n_rays: int) -> TDivisor:
        a = [Fraction(0)] * n_rays
        for r, v in zip(self.basis_rays, c):
            a[r] = Fraction(v)
        return TDivisor(tuple(a))

    def equivalent(self, a: Sequence, b: Sequence) -> bool:
        return self.to_class(a) == self.to_class(b)


def class_lattice(fan: Fan) -> ClassLattice:
    rel = [[u[i] for u in fan.rays] for i in range(fan.rank)]
    hnf = linalg.hermite_normal_form(rel)
    red, piv = linalg.rref(rel)
    basis = tuple(j for j in range(len(fan.rays)) if j not in piv)
    return ClassLattice(tuple(map(tuple, rel)), tuple(map(tuple, hnf)), tuple(piv), basis,
                        tuple(map(tuple, red)))


# ---------------------------------------------------------------- nef cone

def wall_inequalities(fan: Fan) -> list[tuple[int, ...]]:
    """Primitive integer functionals w on ray coefficients, one per wall;
    D is nef iff w . a >= 0 for all of them."""
    out = []
    for _, i, _, opp in fan.walls():
        c = fan.cones[i]
        inv = fan._inverses[i]
        u = fan.rays[opp]
        w = [Fraction(0)] * len(fan.rays)
        w[opp] += 1
        # <m_sigma, u> = -sum_j a_{c_j} (inv u)_j
        coeff = linalg.mat_vec(inv, u)
        for j, r in enumerate(c):
            w[r] -= coeff[j]
        out.append(linalg.primitive(w))
    return out


def is_nef(fan: Fan, a: Sequence) -> bool:
    return all(_dot(w, a) >= 0 for w in wall_inequalities(fan))


def extreme_rays(W: Sequence[Sequence]) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone {x : W x >= 0} by double description.

    Rows are added in order after an initial basis made of the first linearly
    independent rows; adjacency uses the combinatorial test. Output rays are
    primitive integer vectors sorted in decreasing lexicographic order.
    """
    W = [tuple(Fraction(v) for v in row) for row in W]
    k = len(W[0])
    if linalg.rank(W) < k:
        raise ValueError("cone contains a line (inequalities have rank < dimension)")
    basis: list[int] = []
    for i, row in enumerate(W):
        if linalg.rank([W[j] for j in basis] + [row]) > len(basis):
            basis.append(i)
        if len(basis) == k:
            break
    inv = linalg.inverse([W[i] for i in basis])
    rays = [linalg.primitive([inv[r][c] for r in range(k)]) for c in range(k)]
    zero = [frozenset(basis[j] for j in range(k) if j != c) for c in range(k)]
    done = list(basis)
    for i, row in enumerate(W):
        if i in basis:
            continue
        vals = [_dot(row, r) for r in rays]
        pos = [j for j, v in enumerate(vals) if v > 0]
        neg = [j for j, v in enumerate(vals) if v < 0]
        zer = [j for j, v in enumerate(vals) if v == 0]
        new_rays = [rays[j] for j in pos + zer]
        new_zero = [zero[j] for j in pos] + [zero[j] | {i} for j in zer]
        for p in pos:
            for q in neg:
                common = zero[p] & zero[q]
                if len(common) < k - 2:
                    continue
                if any(t not in (p, q) and common <= zero[t] for t in range(len(rays))):
                    continue
                vec = [vals[p] * b - vals[q] * a for a, b in zip(rays[p], rays[q])]
                new_rays.append(linalg.primitive(vec))
                new_zero.append(common | {i})
        rays, zero = new_rays, new_zero
        done.append(i)
    uniq = sorted(set(rays), reverse=True)
    return uniq


@dataclass(frozen=True)
class NefData:
    extremal_classes: tuple  # TDivisor representatives on the basis rays
    class_vectors: tuple
    class_dim: int
    inequalities: tuple      # in class coordinates

    def ample_class(self) -> tuple[Fraction, ...]:
        return tuple(sum(col) for col in zip(*self.class_vectors))


def nef_cone(fan: Fan) -> NefData:
    lat = class_lattice(fan)
    ineq = [tuple(w[r] for r in lat.basis_rays) for w in wall_inequalities(fan)]
    ineq = sorted(set(tuple(linalg.primitive(w)) for w in ineq if any(w)), reverse=True)
    if not ineq:
        raise NotComplete("no wall inequalities; fan has no walls")
    rays = extreme_rays(ineq)
    if linalg.rank(rays) < lat.rank:
        raise NotComplete("nef cone is not full-dimensional (variety not projective)")
    divisors = tuple(lat.from_class(v, len(fan.rays)) for v in rays)
    for d in divisors:
        assert is_nef(fan, d.coefficients)
    return NefData(divisors, tuple(rays), lat.rank, tuple(ineq))


# ---------------------------------------------------------------- endomorphisms

def infer_cone_map(fan: Fan, phi) -> tuple[int, ...]:
    out = []
    for c in fan.cones:
        images = [linalg.mat_vec(phi, fan.rays[r]) for r in c]
        target = next((j for j in range(len(fan.cones))
                       if all(fan.in_cone(j, v) for v in images)), None)
        if target is None:
            raise IncompatibleEndo(f"phi maps cone {c} into no maximal cone")
        out.append(target)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class ToricEndo(SelfMap):
    """Toric morphism from a lattice map phi of N compatible with the fan.

    On torus points it is the monomial map x -> (prod_j x_j^{phi_ij})_i, i.e.
    f^* chi^m = chi^{phi^T m}.
    """

    fan: Fan
    phi: tuple
    cone_map: tuple = ()
    kind = "toric"

    def __post_init__(self):
        phi = tuple(tuple(int(v) for v in row) for row in self.phi)
        object.__setattr__(self, "phi", phi)
        if len(phi) != self.fan.rank or any(len(r) != self.fan.rank for r in phi):
            raise SpecError("phi must be rank x rank")
        if linalg.det(phi) == 0:
            raise SpecError("phi must be invertible over Q")
        inferred = infer_cone_map(self.fan, phi)
        if self.cone_map and tuple(self.cone_map) != inferred:
            # an asserted map is accepted only if it is also valid
            for c, t in zip(self.fan.cones, self.cone_map):
                for r in c:
                    if not self.fan.in_cone(t, linalg.mat_vec(phi, self.fan.rays[r])):
                        raise IncompatibleEndo(f"phi(ray {r}) not in asserted cone {t}")
        else:
            object.__setattr__(self, "cone_map", inferred)

    @property
    def n(self) -> int:
        return self.fan.rank

    def monomial_matrix(self):
        return [list(r) for r in self.phi]

    @cached_property
    def _monomial(self) -> MonomialMap:
        return MonomialMap(self.phi)

    def evaluate(self, x: TorusPoint) -> TorusPoint:
        return self._monomial.evaluate(x)

    @cached_property
    def nef(self) -> NefData:
        return nef_cone(self.fan)

    @cached_property
    def ample_fibration(self) -> "Fibration":
        lat = class_lattice(self.fan)
        H = lat.from_class(self.nef.ample_class(), len(self.fan.rays))
        return semiample_fibration(self.fan, H)

    def height(self, x: TorusPoint) -> float:
        """Height attached to the ample class sum of the nef generators."""
        return self.ample_fibration.height(x)

    def power(self, n: int) -> "ToricEndo":
        if n < 1:
            raise ValueError("power must be >= 1")
        return ToricEndo(self.fan, linalg.mat_pow([list(r) for r in self.phi], n))

    def pullback_matrix(self):
        return pullback_matrix(self.fan, self)

    def pullback_spectrum(self) -> list[float]:
        return eigen_moduli(self.pullback_matrix())

    def parse_point(self, data) -> TorusPoint:
        x = TorusPoint.from_json(data)
        if x.n != self.n:
            raise SpecError("torus point has wrong length")
        return x

    def descriptor(self) -> dict:
        return {"kind": "toric", "fan": self.fan.to_json(), "phi": [list(r) for r in self.phi]}


def pullback_divisor(fan: Fan, endo: ToricEndo, a: Sequence) -> TDivisor:
    """f^*D: coefficient at rho' is -psi_D(phi(u_rho'))."""
    out = []
    for rho, u in enumerate(fan.rays):
        src = fan.cone_of_ray(rho)
        tgt = endo.cone_map[src]
        v = linalg.mat_vec(endo.phi, u)
        out.append(-_dot(fan.m_sigma(a, tgt), v))
    return TDivisor(tuple(out))


def pullback_matrix(fan: Fan, endo: ToricEndo) -> list[list[Fraction]]:
    """Matrix of f^* on class coordinates (column j = class of f^* of basis j)."""
    if endo.fan is not fan and endo.fan.to_json() != fan.to_json():
        raise IncompatibleEndo("endomorphism belongs to a different fan")
    lat = class_lattice(fan)
    r = len(fan.rays)
    cols = []
    for j in range(lat.rank):
        e = [Fraction(0)] * lat.rank
        e[j] = Fraction(1)
        D = lat.from_class(e, r)
        cols.append(lat.to_class(pullback_divisor(fan, endo, D.coefficients).coefficients))
    # descent: principal divisors must pull back to principal divisors
    for rel in lat.relations:
        pb = pullback_divisor(fan, endo, rel).coefficients
        if any(lat.to_class(pb)):
            raise IncompatibleEndo("pullback does not preserve linear equivalence")
    return linalg.transpose(cols)


@dataclass(frozen=True)
class RayFixing:
    n: int
    permutation: tuple
    lambdas: tuple  # exact positive integers, multipliers of (f^n)^* on each class


def ray_fixing_iterate(nef: NefData, pullback) -> RayFixing:
    vecs = [tuple(Fraction(v) for v in c) for c in nef.class_vectors]
    perm = []
    for v in vecs:
        w = linalg.mat_vec(pullback, v)
        hit = None
        for j, u in enumerate(vecs):
            k = next(i for i, x in enumerate(u) if x != 0)
            c = w[k] / u[k]
            if c > 0 and all(wi == c * ui for wi, ui in zip(w, u)):
                hit = j
                break
        if hit is None:
            raise NotPermutation(f"f^* sends extremal class {v} to {w}, not onto an extremal ray")
        perm.append(hit)
    if sorted(perm) != list(range(len(vecs))):
        raise NotPermutation("induced map on extremal rays is not a bijection")
    order, seen = 1, set()
    for i in range(len(perm)):
        if i in seen:
            continue
        length, j = 0, i
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        order = math.lcm(order, length)
    Mn = linalg.mat_pow([list(map(Fraction, r)) for r in pullback], order)
    lambdas = []
    for v in vecs:
        w = linalg.mat_vec(Mn, v)
        k = next(i for i, x in enumerate(v) if x != 0)
        lam = w[k] / v[k]
        if any(wi != lam * vi for wi, vi in zip(w, v)):
            raise NotPermutation("iterate does not fix the extremal ray")
        if lam.denominator != 1 or lam <= 0:
            raise NotPermutation(f"multiplier {lam} is not a positive integer")
        lambdas.append(int(lam))
    return RayFixing(order, tuple(perm), tuple(lambdas))


# ---------------------------------------------------------------- fibrations

def _monomial_value(x: Sequence[Fraction], m: Sequence[int]) -> Fraction:
    return monomial(x, m)


@dataclass(frozen=True)
class Fibration:
    """pi_D : X -> Y subset P^{|P_D cap M| - 1}, x -> (x^m)_m."""

    divisor: TDivisor
    lattice_points: tuple
    origin: tuple
    basis: tuple          # rows b_j of the lattice spanned by P_D - origin
    exponents: tuple      # c(m): m = origin + sum_j c_j b_j

    @property
    def dim(self) -> int:
        return len(self.basis)

    def project(self, x: TorusPoint) -> ProjPoint:
        return normalize([_monomial_value(x.coords, m) for m in self.lattice_points])

    def base_coords(self, x: TorusPoint) -> TorusPoint | None:
        if not self.basis:
            return None
        return TorusPoint(tuple(_monomial_value(x.coords, b) for b in self.basis))

    def embed_base(self, y: TorusPoint | None) -> ProjPoint:
        """Point of Y in P^{|P|-1} from torus coordinates of Y."""
        if y is None:
            return ProjPoint((1,))
        return normalize([_monomial_value(y.coords, c) for c in self.exponents])

    def height(self, x: TorusPoint) -> float:
        return weil_height(self.project(x))

    def base_height(self, y: TorusPoint | None) -> float:
        return weil_height(self.embed_base(y))


def lattice_points(fan: Fan, a: Sequence) -> list[tuple[int, ...]]:
    verts = [fan.m_sigma(a, i) for i in range(len(fan.cones))]
    lo = [math.floor(min(v[k] for v in verts)) for k in range(fan.rank)]
    hi = [math.ceil(max(v[k] for v in verts)) for k in range(fan.rank)]
    total = math.prod(h - l + 1 for l, h in zip(lo, hi))
    if total > LATTICE_CANDIDATE_CAP:
        raise EmptyPolytope(f"bounding box has {total} candidates, above cap")
    pts = []
    for m in product(*(range(l, h + 1) for l, h in zip(lo, hi))):
        if all(_dot(m, u) >= -ar for u, ar in zip(fan.rays, a)):
            pts.append(tuple(m))
    return pts


def semiample_fibration(fan: Fan, D: TDivisor) -> Fibration:
    a = D.coefficients
    if not is_nef(fan, a):
        raise NotNef(f"divisor {[str(v) for v in a]} fails a wall inequality")
    pts = lattice_points(fan, a)
    if not pts:
        raise EmptyPolytope("P_D has no lattice points")
    origin = pts[0]
    diffs = [tuple(x - y for x, y in zip(m, origin)) for m in pts[1:]]
    basis = tuple(tuple(r) for r in linalg.hermite_normal_form(diffs)) if diffs else ()
    exps = []
    for m, d in zip(pts, [(0,) * fan.rank] + diffs):
        if not basis:
            exps.append(())
            continue
        c = linalg.solve(linalg.transpose(basis), d)
        exps.append(tuple(int(v) for v in c))
    return Fibration(D, tuple(pts), origin, basis, tuple(exps))


def induced_base_map(fan: Fan, endo: ToricEndo, fib: Fibration, lam: int,
                     samples: int = 100, seed: int = 0) -> MonomialMap | None:
    """Monomial map g on the torus of Y with pi o f = g o pi.

    Returns None when Y is a point. Raises ConjugacyFailure if the exact check
    on ``samples`` random torus points fails.
    """
    lat = class_lattice(fan)
    M = pullback_matrix(fan, endo)
    cls = lat.to_class(fib.divisor.coefficients)
    if tuple(linalg.mat_vec(M, cls)) != tuple(Fraction(lam) * c for c in cls):
        raise ConjugacyFailure(f"f^*D is not linearly equivalent to {lam} D")
    if not fib.basis:
        return None
    phiT = linalg.transpose(endo.phi)
    BT = linalg.transpose(fib.basis)
    C = []
    for b in fib.basis:
        c = linalg.solve(BT, linalg.mat_vec(phiT, b))
        if c is None or any(v.denominator != 1 for v in c):
            raise ConjugacyFailure("phi^T does not preserve the fibre lattice")
        C.append([int(v) for v in c])
    g = MonomialMap(C)
    rng = random.Random(seed)
    for _ in range(samples):
        x = TorusPoint(tuple(Fraction(rng.choice((-1, 1)) * rng.randint(1, 50), rng.randint(1, 50))
                             for _ in range(fan.rank)))
        lhs = fib.project(endo.evaluate(x))
        rhs = fib.embed_base(g.evaluate(fib.base_coords(x)))
        if lhs != rhs:
            raise ConjugacyFailure(f"pi(f(x)) != g(pi(x)) at x = {x.to_json()}")
    return g
