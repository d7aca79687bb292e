"""Canonical heights of eigendivisors, the ample canonical height, and the
search for its vanishing locus Z_f among points of bounded height."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .errors import ArithDynError, BoundTooLarge, MissingDecomposition
from .exact import (POINT_CAP, ProjPoint, TorusPoint, enumerate_points,
                    torus_height, weil_height)
from .maps import (BIT_BUDGET, LinearUnipotentMap, MonomialMap, ProductMap,
                   ProjectiveMorphism, SelfMap)

SAFETY = 2.0
MIN_STEPS = 4
_EPS = 2.0 ** -52


# ---------------------------------------------------------------- single eigendivisor

@dataclass
class EigenDivisorHeight:
    """A height h_D with f^*D ~ lam D, evaluated on the states of ``map``."""

    height_fn: Callable
    lam: float
    map: SelfMap
    label: str = "D"


@dataclass
class CanonicalHeightEstimate:
    value: float
    error_bar: float
    n_used: int
    discrepancy_max: float
    rigor: str = "heuristic-bar"
    budget_exceeded: bool = False

    def to_json(self) -> dict:
        return {"value": repr(self.value), "error_bar": repr(self.error_bar),
                "n_used": self.n_used, "discrepancy_max": repr(self.discrepancy_max),
                "rigor": self.rigor, "budget_exceeded": self.budget_exceeded}


def _bar(disc: float, lam: float, n: int, value: float) -> float:
    # telescoping tail bound with the safety factor, plus float rounding slack
    return disc * SAFETY / (lam - 1) / lam ** n + 16 * _EPS * (n + 1) * max(1.0, abs(value))


def canonical_height(E: EigenDivisorHeight, x, target: float = 1e-9, max_iters: int = 64,
                     bit_budget: int = BIT_BUDGET,
                     decide_above: float | None = None) -> CanonicalHeightEstimate:
    """h_D(f^n x) / lam^n, iterated until the heuristic bar is below ``target``.

    The bar is discrepancy_max * 2 / ((lam - 1) lam^n), where discrepancy_max
    is the largest |h_D(f(y)) - lam h_D(y)| seen along the orbit. Hitting
    ``max_iters`` or ``bit_budget`` returns the best estimate so far, flagged.
    With ``decide_above`` set, iteration also stops once value - bar exceeds
    it, which is all a vanishing test needs to know.
    """
    lam = float(E.lam)
    if lam <= 1:
        raise ValueError("canonical height needs lam > 1")
    f = E.map
    h = E.height_fn(x)
    disc = 0.0
    bits = f.bits(x)
    n = 0
    best = CanonicalHeightEstimate(h, _bar(0.0, lam, 0, h), 0, 0.0)
    while True:
        if n >= MIN_STEPS and best.error_bar <= target:
            return best
        if n >= MIN_STEPS and decide_above is not None and best.value - best.error_bar > decide_above:
            return best
        if n >= max_iters:
            break
        y = f.evaluate(x)
        b = f.bits(y)
        if bits + b > bit_budget:
            break
        bits += b
        h_next = E.height_fn(y)
        disc = max(disc, abs(h_next - lam * h))
        x, h, n = y, h_next, n + 1
        value = h / lam ** n
        best = CanonicalHeightEstimate(value, _bar(disc, lam, n, value), n, disc)
    best.budget_exceeded = best.error_bar > target
    return best


@dataclass(frozen=True)
class FunctionalEquationCheck:
    max_residual: float
    allowed: float
    ok: bool


def functional_equation_check(E: EigenDivisorHeight, x, n_steps: int = 3,
                              **budgets) -> FunctionalEquationCheck:
    """max_k |hhat(f^{k+1} x) - lam hhat(f^k x)| against twice the combined bars."""
    lam = float(E.lam)
    points = [x]
    for _ in range(n_steps + 1):
        points.append(E.map.evaluate(points[-1]))
    est = [canonical_height(E, p, **budgets) for p in points[: n_steps + 2]]
    worst, allowed, ok = 0.0, 0.0, True
    for k in range(n_steps + 1):
        r = abs(est[k + 1].value - lam * est[k].value)
        bound = 2 * (est[k + 1].error_bar + lam * est[k].error_bar)
        ok = ok and r <= bound
        if r >= worst:
            worst, allowed = r, bound
    return FunctionalEquationCheck(worst, allowed, ok)


# ---------------------------------------------------------------- eigen structures

@dataclass
class EigenComponent:
    """One nef generator D_i with (f^N)^*D_i ~ lam D_i, realized through its
    fibration pi_i : X -> Y_i and the induced base map g_i."""

    label: str
    lam: int
    project: Callable        # X-state -> Y-state
    base_map: SelfMap | None  # g_i on Y_i (None when Y_i is a point)
    base_height: Callable    # height on Y_i from the very ample H_i

    def divisor_height(self, x) -> float:
        return self.base_height(self.project(x))


@dataclass
class EigenStructure:
    f: SelfMap
    period: int
    fN: SelfMap
    components: list

    @property
    def delta_N(self) -> int:
        """Dynamical degree of f^N: the largest multiplier."""
        return max(c.lam for c in self.components)

    @property
    def delta(self) -> float:
        return self.delta_N ** (1.0 / self.period)

    def dominant(self) -> list[EigenComponent]:
        return [c for c in self.components if c.lam == self.delta_N]

    def expanding(self) -> list[EigenComponent]:
        return [c for c in self.components if c.lam > 1]

    def divisor_heights(self) -> list[EigenDivisorHeight]:
        return [EigenDivisorHeight(c.divisor_height, c.lam, self.fN, c.label)
                for c in self.components]


def _identity(x):
    return x


def _coordinate(i):
    return lambda x: TorusPoint((x.coords[i],))


def _factor(i):
    return lambda x: x[i]


def _compose(outer, inner):
    return lambda x: outer(inner(x))


def eigen_structure(f: SelfMap) -> EigenStructure:
    """Eigendivisor decomposition of f, or MissingDecomposition.

    Supported: morphisms of P^N of degree >= 2, diagonal monomial maps on
    (P^1)^n, products of those, and toric endomorphisms (via the nef cone).
    """
    if isinstance(f, ProjectiveMorphism):
        if f.degree < 2:
            raise MissingDecomposition("dynamical degree must exceed 1")
        comp = EigenComponent(f"H(P^{f.N})", f.degree, _identity, f, weil_height)
        return EigenStructure(f, 1, f, [comp])
    if isinstance(f, MonomialMap):
        if any(f.A[i][j] for i in range(f.n) for j in range(f.n) if i != j):
            raise MissingDecomposition("only diagonal monomial maps carry a product structure")
        comps = [EigenComponent(f"F{i + 1}", abs(f.A[i][i]), _coordinate(i),
                                MonomialMap([[f.A[i][i]]]), torus_height) for i in range(f.n)]
        if max(c.lam for c in comps) < 2:
            raise MissingDecomposition("dynamical degree must exceed 1")
        return EigenStructure(f, 1, f, comps)
    if isinstance(f, ProductMap):
        comps = []
        for i, g in enumerate(f.components):
            try:
                sub = eigen_structure(g)
            except MissingDecomposition:
                if isinstance(g, ProjectiveMorphism) and g.degree == 1:
                    sub = EigenStructure(g, 1, g, [EigenComponent(
                        f"H(P^{g.N})", 1, _identity, g, weil_height)])
                else:
                    raise
            if sub.period != 1:
                raise MissingDecomposition("product factors must fix their nef rays")
            for c in sub.components:
                comps.append(EigenComponent(f"{i + 1}:{c.label}", c.lam,
                                            _compose(c.project, _factor(i)),
                                            c.base_map, c.base_height))
        if max(c.lam for c in comps) < 2:
            raise MissingDecomposition("dynamical degree must exceed 1")
        return EigenStructure(f, 1, f, comps)
    if getattr(f, "kind", None) == "toric":
        return _toric_structure(f)
    if isinstance(f, LinearUnipotentMap):
        raise MissingDecomposition("unipotent maps have dynamical degree 1")
    raise MissingDecomposition(f"no eigendivisor data for {type(f).__name__}")


def _toric_structure(f) -> EigenStructure:
    from .toric import induced_base_map, ray_fixing_iterate, semiample_fibration

    fix = ray_fixing_iterate(f.nef, f.pullback_matrix())
    fN = f.power(fix.n) if fix.n > 1 else f
    comps = []
    for i, (D, lam) in enumerate(zip(f.nef.extremal_classes, fix.lambdas)):
        fib = semiample_fibration(f.fan, D)
        g = induced_base_map(f.fan, fN, fib, lam)
        comps.append(EigenComponent(f"D{i + 1}", lam, fib.base_coords, g, fib.base_height))
    if max(fix.lambdas) < 2:
        raise MissingDecomposition("dynamical degree must exceed 1")
    return EigenStructure(f, fix.n, fN, comps)


# ---------------------------------------------------------------- ample canonical height

@dataclass
class AmpleHeight:
    value: float
    error_bar: float
    parts: dict = field(default_factory=dict)
    budget_exceeded: bool = False


def component_height(c: EigenComponent, x, target: float = 1e-9,
                     **budgets) -> CanonicalHeightEstimate:
    """hhat_{D_i}(x), computed as hhat_{H_i}(pi_i(x)) on the base Y_i."""
    y = c.project(x)
    if c.base_map is None or y is None:
        return CanonicalHeightEstimate(0.0, 0.0, 0, 0.0)
    if c.lam < 2:
        raise ValueError("canonical height needs lam > 1")
    E = EigenDivisorHeight(c.base_height, c.lam, c.base_map, c.label)
    return canonical_height(E, y, target=target, **budgets)


def ample_canonical_height(f: SelfMap, x, target: float = 1e-9, structure: EigenStructure | None = None,
                           **budgets) -> AmpleHeight:
    """liminf h_H(f^n x) / delta^n (with l_f = 0) as the sum of the dominant
    eigendivisor canonical heights; for a ray-permuting f the liminf runs over
    residues modulo the period."""
    s = structure or eigen_structure(f)
    best = None
    y = x
    for r in range(s.period):
        parts = {c.label: component_height(c, y, target, **budgets) for c in s.dominant()}
        scale = s.delta ** r
        val = sum(p.value for p in parts.values()) / scale
        bar = sum(p.error_bar for p in parts.values()) / scale
        cand = AmpleHeight(val, bar, parts, any(p.budget_exceeded for p in parts.values()))
        if best is None or cand.value < best.value:
            best = cand
        if r + 1 < s.period:
            y = f.evaluate(y)
    return best


# ---------------------------------------------------------------- Z_f search

def is_preperiodic(g: SelfMap | None, y, max_steps: int = 64, bit_cap: int = 1 << 14) -> bool:
    """Exact cycle detection, independent of any height computation.

    An orbit that repeats within ``max_steps`` is preperiodic; one whose states
    outgrow ``bit_cap`` bits (or never repeat) is reported as not preperiodic.
    """
    if g is None or y is None:
        return True
    seen = set()
    for _ in range(max_steps + 1):
        if y in seen:
            return True
        seen.add(y)
        if g.bits(y) > bit_cap:
            return False
        y = g.evaluate(y)
    return False


@dataclass
class ZfEntry:
    point: object
    hhat: float
    error_bar: float
    predicted_member: bool


@dataclass
class ZfReport:
    locus: str
    height_bound: float
    tol: float
    enumerated: int
    entries: list
    violations: int

    def to_json(self, f: SelfMap) -> dict:
        return {"locus": self.locus, "height_bound": repr(self.height_bound), "tol": repr(self.tol),
                "enumerated": self.enumerated, "count": len(self.entries),
                "violations": self.violations,
                "points": [{"point": f.point_json(e.point), "hhat": repr(e.hhat),
                            "error_bar": repr(e.error_bar),
                            "predicted_member": e.predicted_member} for e in self.entries]}


def torus_points(n: int, bound: float, cap: int = POINT_CAP) -> Iterator[TorusPoint]:
    """Points of G_m^n(Q) whose coordinates all have height <= bound."""
    line = [p for p in enumerate_points(1, bound) if p.coords[0] and p.coords[1]]
    if len(line) ** n > cap:
        raise BoundTooLarge(f"{len(line)}^{n} torus points exceed cap {cap}")
    from fractions import Fraction

    vals = [Fraction(p.coords[0], p.coords[1]) for p in line]
    for c in itertools.product(vals, repeat=n):
        yield TorusPoint(c)


def _atom_states(g: SelfMap, bound: float, cap: int) -> list:
    if isinstance(g, ProjectiveMorphism):
        return list(enumerate_points(g.N, bound, cap))
    if isinstance(g, MonomialMap) or getattr(g, "kind", None) == "toric":
        return list(torus_points(g.n, bound, cap))
    raise MissingDecomposition(f"cannot enumerate states of {type(g).__name__}")


def _relevant(s: EigenStructure, locus: str) -> list[EigenComponent]:
    return s.dominant() if locus == "ample" else s.expanding()


def zf_search(f: SelfMap, height_bound: float = math.log(100), tol: float = 1e-6,
              locus: str = "joint", cap: int = POINT_CAP, max_iters: int = 48,
              bit_budget: int = BIT_BUDGET) -> ZfReport:
    """Points of height <= height_bound on which canonical heights vanish.

    ``locus="joint"`` keeps points where every expanding eigendivisor canonical
    height hhat_{D_i} is below ``tol`` (the common zero set of all the
    eigendivisor heights). ``locus="ample"`` keeps points whose ample canonical
    height is below ``tol``, i.e. only the eigendivisors with lam_i = delta
    must vanish. Each survivor is checked against the structural prediction:
    pi_i(x) preperiodic for g_i, found by exact cycle detection.
    """
    if locus not in ("joint", "ample"):
        raise ValueError("locus must be 'joint' or 'ample'")
    s = eigen_structure(f)
    budgets = {"max_iters": max_iters, "bit_budget": bit_budget}
    target = tol / 10
    rel = _relevant(s, locus)
    rel_ids = {id(c) for c in rel}

    if isinstance(f, (ProductMap,)) or (isinstance(f, MonomialMap) and f.n > 1):
        # factorized: each component depends on a single factor
        if isinstance(f, ProductMap):
            atoms = list(f.components)
        else:
            atoms = [MonomialMap([[f.A[i][i]]]) for i in range(f.n)]
        per_atom = []
        for i, g in enumerate(atoms):
            comps = [c for c in s.components if c.label.split(":")[0] == str(i + 1)] \
                if isinstance(f, ProductMap) else [s.components[i]]
            states = _atom_states(g, height_bound, cap)
            keep = []
            for st in states:
                full = _embed(f, i, st)
                vals, ok = {}, True
                for c in comps:
                    if id(c) not in rel_ids:
                        continue
                    est = component_height(c, full, target, decide_above=tol, **budgets)
                    vals[c.label] = est
                    ok = ok and est.value < tol
                if ok:
                    pred = all(is_preperiodic(c.base_map, c.project(full))
                               for c in comps if id(c) in rel_ids)
                    keep.append((st, vals, pred))
            per_atom.append((keep, len(states)))
        enumerated = math.prod(n for _, n in per_atom)
        entries = []
        dom = {c.label for c in s.dominant()}
        for combo in itertools.product(*(k for k, _ in per_atom)):
            if isinstance(f, ProductMap):
                point = tuple(st for st, _, _ in combo)
            else:
                point = TorusPoint(tuple(st.coords[0] for st, _, _ in combo))
            parts = {}
            for _, vals, _ in combo:
                parts.update(vals)
            dom_parts = [v for k, v in parts.items() if k in dom]
            if len(dom_parts) < len(dom):
                ah = ample_canonical_height(f, point, target, structure=s, **budgets)
                hv, hb = ah.value, ah.error_bar
            else:
                hv = sum(v.value for v in dom_parts)
                hb = sum(v.error_bar for v in dom_parts)
            pred = all(p for _, _, p in combo)
            entries.append(ZfEntry(point, hv, hb, pred))
    else:
        states = _atom_states(f, height_bound, cap)
        enumerated = len(states)
        entries = []
        for st in states:
            ok, pred, y = False, False, st
            for r in range(s.period):
                ests = [component_height(c, y, target, decide_above=tol, **budgets) for c in rel]
                if all(e.value < tol for e in ests):
                    ok = True
                    pred = all(is_preperiodic(c.base_map, c.project(y)) for c in rel)
                    break
                if locus == "joint":
                    break
                y = f.evaluate(y)
            if ok:
                ah = ample_canonical_height(f, st, target, structure=s, **budgets)
                entries.append(ZfEntry(st, ah.value, ah.error_bar, pred))
    violations = sum(1 for e in entries if not e.predicted_member)
    return ZfReport(locus, height_bound, tol, enumerated, entries, violations)


def _embed(f: SelfMap, i: int, st):
    """A full state whose i-th factor is ``st`` (other factors are irrelevant)."""
    if isinstance(f, ProductMap):
        return tuple(st if j == i else None for j in range(len(f.components)))
    coords = [1] * f.n
    coords[i] = st.coords[0]
    return TorusPoint(tuple(coords))
