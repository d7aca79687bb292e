import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from arithdyn.errors import DegenerateImage, DegreeOverflow, DomainViolation, OrbitError, SpecError
from arithdyn.exact import ProjPoint, TorusPoint, normalize, torus_height, weil_height
from arithdyn.maps import (AffinePoint, LinearUnipotentMap, MonomialMap, ProductMap,
                           ProjectiveMorphism, binary_resultant, check_morphism, compose_power,
                           iterate_orbit)

SQ = ProjectiveMorphism.power_map(1, 2)
QUAD = ProjectiveMorphism(1, (((1, (2, 0)), (1, (0, 2))), ((1, (0, 2)),)))
LATTES_LIKE = ProjectiveMorphism(1, (((1, (2, 0)), (-2, (1, 1))), ((3, (0, 2)), (Fraction(1, 2), (2, 0)))))
P2_MAP = ProjectiveMorphism(2, (((1, (2, 0, 0)), (1, (0, 1, 1))),
                                ((1, (0, 2, 0)),),
                                ((1, (0, 0, 2)), (-1, (1, 1, 0)))))
FIB = MonomialMap([[1, 1], [1, 0]])
CAT = MonomialMap([[2, 1], [1, 1]])
INV = MonomialMap([[-1, 0], [1, -2]])
UNI = LinearUnipotentMap([[1, 1, 0], [0, 1, 1], [0, 0, 1]])

small_rat = st.fractions(min_value=-50, max_value=50, max_denominator=20)
nonzero = small_rat.filter(lambda q: q != 0)
p1_points = st.tuples(st.integers(-40, 40), st.integers(-40, 40)).filter(any).map(normalize)
p2_points = st.tuples(*[st.integers(-20, 20)] * 3).filter(any).map(normalize)
t2_points = st.tuples(nonzero, nonzero).map(TorusPoint)
a3_points = st.tuples(small_rat, small_rat, small_rat).map(AffinePoint)


def iterate(f, x, n):
    for _ in range(n):
        x = f.evaluate(x)
    return x


def test_power_composition_oracle():
    sq2 = SQ.power(2)
    assert sq2.as_dicts() == [{(4, 0): 1}, {(0, 4): 1}]
    assert SQ.evaluate(ProjPoint((2, 1))) == ProjPoint((4, 1))


def test_degree_cap():
    with pytest.raises(DegreeOverflow):
        SQ.power(13)


def test_not_homogeneous():
    with pytest.raises(SpecError):
        ProjectiveMorphism(1, (((1, (2, 0)),), ((1, (0, 1)),)))


def test_degenerate_image():
    f = ProjectiveMorphism(1, (((1, (1, 1)),), ((1, (0, 2)),)))
    with pytest.raises(DegenerateImage):
        f.evaluate(ProjPoint((1, 0)))


def test_resultant_certificate():
    cert = check_morphism(SQ)
    assert cert.status == "Certified" and cert.resultant == 1
    bad = check_morphism(ProjectiveMorphism(1, (((1, (1, 1)),), ((1, (0, 2)),))))
    assert bad.status == "Fail" and bad.witness == ProjPoint((1, 0))


def test_resultant_of_linear_forms():
    # Res(x - 2y, x - 3y) = det [[1, -2], [1, -3]] = -1
    assert binary_resultant(((1, (1, 0)), (-2, (0, 1))), ((1, (1, 0)), (-3, (0, 1))), 1, 1) == -1


def test_higher_dimension_certificate_is_heuristic():
    assert check_morphism(ProjectiveMorphism.power_map(2, 2)).status == "HeuristicPass"


@pytest.mark.parametrize("f", [SQ, QUAD, LATTES_LIKE])
@given(x=p1_points, n=st.integers(1, 4))
def test_compose_power_matches_iteration_p1(f, x, n):
    try:
        expect = iterate(f, x, n)
    except DegenerateImage:
        return
    assert compose_power(f, n).evaluate(x) == expect


@given(x=p2_points, n=st.integers(1, 3))
def test_compose_power_matches_iteration_p2(x, n):
    try:
        expect = iterate(P2_MAP, x, n)
    except DegenerateImage:
        return
    assert compose_power(P2_MAP, n).evaluate(x) == expect


@pytest.mark.parametrize("f", [FIB, CAT, INV])
@given(x=t2_points, n=st.integers(1, 5))
def test_compose_power_matches_iteration_monomial(f, x, n):
    assert compose_power(f, n).evaluate(x) == iterate(f, x, n)


@given(x=a3_points, n=st.integers(1, 5))
def test_compose_power_matches_iteration_unipotent(x, n):
    assert compose_power(UNI, n).evaluate(x) == iterate(UNI, x, n)


@given(x=p1_points, y=t2_points, n=st.integers(1, 4))
def test_compose_power_matches_iteration_product(x, y, n):
    f = ProductMap((SQ, FIB))
    assert compose_power(f, n).evaluate((x, y)) == iterate(f, (x, y), n)


@pytest.mark.parametrize("f", [SQ, QUAD, LATTES_LIKE])
@given(x=p1_points)
def test_projective_height_upper_bound(f, x):
    C = f.height_upper_constant()
    trace = iterate_orbit(f, x, 4)
    for h0, h1 in zip(trace.heights, trace.heights[1:]):
        assert h1 <= f.degree * h0 + C + 1e-9


@given(x=p2_points)
def test_projective_height_upper_bound_p2(x):
    C = P2_MAP.height_upper_constant()
    try:
        trace = iterate_orbit(P2_MAP, x, 3)
    except OrbitError:
        return
    for h0, h1 in zip(trace.heights, trace.heights[1:]):
        assert h1 <= 2 * h0 + C + 1e-9


@pytest.mark.parametrize("f", [FIB, CAT, INV])
@given(x=t2_points)
def test_monomial_height_bound(f, x):
    y = x
    for _ in range(4):
        fy = f.evaluate(y)
        assert torus_height(fy) <= f.height_bound(y) + 1e-9
        y = fy


def test_monomial_rejects_singular():
    with pytest.raises(SpecError):
        MonomialMap([[1, 2], [2, 4]])


def test_monomial_domain():
    with pytest.raises(DomainViolation):
        FIB.evaluate(ProjPoint((1, 2)))


def test_fibonacci_orbit_closed_form():
    trace = iterate_orbit(FIB, FIB.parse_point(["2", "3"]), 20)
    F = [0, 1]
    while len(F) < 25:
        F.append(F[-1] + F[-2])
    for n, h in enumerate(trace.heights):
        # the x-coordinate is 2^F(n+1) 3^F(n), the y-coordinate its predecessor
        expect = F[n + 1] * math.log(2) + F[n] * math.log(3)
        if n:
            expect += F[n] * math.log(2) + F[n - 1] * math.log(3)
        else:
            expect += math.log(3)
        assert math.isclose(h, expect, rel_tol=1e-12)


def test_unipotent_is_unipotent():
    assert UNI.is_unipotent()
    assert not LinearUnipotentMap([[2, 0], [0, 1]]).is_unipotent()


def test_unipotent_root_estimator_below_threshold():
    f = LinearUnipotentMap([[1, 1], [0, 1]])
    trace = iterate_orbit(f, f.parse_point(["1", "1"]), 60)
    assert max(1.0, trace.heights[60]) ** (1 / 60) < 1.05
    trace = iterate_orbit(UNI, UNI.parse_point(["0", "0", "1"]), 60)
    assert max(1.0, trace.heights[60]) ** (1 / 60) < 1.05


def test_bit_budget_truncates():
    trace = iterate_orbit(SQ, ProjPoint((2, 1)), 40, bit_budget=5000)
    assert trace.truncated
    assert sum(trace.bit_sizes) <= 5000
    assert trace.points[-1] == ProjPoint((2 ** (2 ** trace.iterates), 1))


def test_orbit_error_carries_iterate():
    # (xy : y^2) has the common zero (1 : 0)
    f = ProjectiveMorphism(1, (((1, (1, 1)),), ((1, (0, 2)),)))
    with pytest.raises(OrbitError) as info:
        iterate_orbit(f, ProjPoint((1, 0)), 3)
    assert info.value.iterate == 1
    assert isinstance(info.value.cause, DegenerateImage)


def test_product_heights():
    f = ProductMap((SQ, FIB))
    x = f.parse_point([["2", "1"], ["2", "3"]])
    assert f.height(x) == max(weil_height(x[0]), torus_height(x[1]))
    g = ProductMap((SQ, FIB), "sum")
    assert math.isclose(g.height(x), weil_height(x[0]) + torus_height(x[1]))


binary_forms = st.integers(1, 3).flatmap(lambda d: st.tuples(
    st.lists(st.integers(-9, 9), min_size=d + 1, max_size=d + 1).filter(any),
    st.lists(st.integers(-9, 9), min_size=d + 1, max_size=d + 1).filter(any)))


@given(binary_forms, p1_points)
def test_resultant_seeded_gcd_matches_plain_normalization(forms, x):
    F, G = forms
    d = len(F) - 1
    polys = tuple(tuple((c, (d - i, i)) for i, c in enumerate(P) if c) for P in (F, G))
    f = ProjectiveMorphism(1, polys)
    raw = [sum(c * x.coords[0] ** e[0] * x.coords[1] ** e[1] for c, e in poly) for poly in f.polys]
    if not any(raw):
        with pytest.raises(DegenerateImage):
            f.evaluate(x)
        return
    assert f.evaluate(x) == normalize(raw)
