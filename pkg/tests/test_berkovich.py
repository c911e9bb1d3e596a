import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from greenline.berkovich import (
    BerkPoint,
    Disk,
    NewtonPolygon,
    count_roots_in_disk,
    format_point,
    gauss,
    gauss_norm,
    hsia,
    hsia_can,
    hsia_infty,
    order_and_join,
    parse_point,
    polynomial_disk_preimage,
    rho,
)
from greenline.fields import INF, Absolute, valuation
from greenline.poly import Poly

P3 = 3
rats = st.fractions(min_value=-50, max_value=50, max_denominator=30)
exps = st.fractions(min_value=-3, max_value=3, max_denominator=2)


def pts(p=P3, classical=True):
    v = st.one_of(exps, st.just(math.inf)) if classical else exps
    return st.builds(lambda a, e: BerkPoint(a, e, p), rats, v)


def z(p, a, e):
    return BerkPoint(Fraction(a), Fraction(e), p)


ONE = Absolute.padic(3, 0)


def test_hsia_infty_examples():
    G = gauss(3)
    for a in (0, 1, 2, Fraction(3, 2)):
        assert hsia_infty(G, BerkPoint.classical(a, 3)) == ONE
    a = BerkPoint.classical(Fraction(5, 7), 3)
    assert hsia_infty(a, a).is_zero()
    assert hsia_infty(z(3, 0, 1), BerkPoint.classical(1, 3)) == ONE
    with pytest.raises(ValueError):
        hsia_infty(G, INF)


def test_hsia_can_examples():
    G = gauss(3)
    assert hsia_can(G, G) == ONE
    assert hsia_can(BerkPoint.classical(0, 3), INF) == ONE
    assert hsia_can(z(3, 0, 1), BerkPoint.classical(0, 3)) == Absolute.padic(3, 1)


def test_order_and_join_examples():
    S, T = z(5, 0, 0), z(5, 0, 1)
    assert order_and_join(S, T) == ("S>=T", S)
    assert order_and_join(T, S) == ("T>=S", S)
    rel, J = order_and_join(z(5, 0, 1), z(5, 1, 1))
    assert rel == "incomparable" and J == gauss(5)
    assert order_and_join(S, S) == ("equal", S)


def test_rho_examples():
    assert rho(gauss(3), z(3, 0, 1)) == 1
    assert rho(z(3, 0, 1), z(3, 0, 1)) == 0
    assert rho(z(5, 0, 1), z(5, 1, 1)) == 2


def test_gauss_norm_examples():
    p = 3
    assert gauss_norm(Poly([p, 0, 1]), gauss(p)) == ONE
    assert gauss_norm(Poly([-p, 0, 1]), z(p, 0, 1)) == Absolute.padic(p, 1)
    for S in (gauss(p), z(p, 2, -2), BerkPoint.classical(Fraction(1, 9), p)):
        assert gauss_norm(Poly([Fraction(18)]), S) == Absolute.padic(p, 2)


def test_count_roots_examples():
    p = 3
    P = Poly([-p, 0, 1])
    assert count_roots_in_disk(P, gauss(p)) == 2
    assert count_roots_in_disk(P, z(p, 0, 1)) == 0
    assert count_roots_in_disk(Poly([-5, 1]), BerkPoint.classical(5, p)) == 1


def test_newton_polygon_shape():
    # (z - 3)(z - 1/3)(z - 9) over Q_3
    P = Poly.from_roots([Fraction(3), Fraction(1, 3), Fraction(9)])
    N = NewtonPolygon.of(P, 3)
    slopes = [s for s, _ in N.segments]
    assert slopes == sorted(slopes) and len(set(slopes)) == len(slopes)
    assert N.length == 3
    assert N.root_valuations() == {-1: 1, 1: 1, 2: 1}


def test_disk_preimage_examples():
    p = 3
    D = polynomial_disk_preimage(Poly([0, 0, 1]), Disk(0, 0, p, closed=False))
    assert D.complete and len(D.components) == 1
    comp, deg = D.components[0]
    assert comp == Disk(0, 0, p, closed=False) and deg == 2
    D = polynomial_disk_preimage(Poly([0, -1, 1]), Disk(0, 1, p))
    assert D.complete
    assert {(c.center, c.v, m) for c, m in D.components} == {(0, 1, 1), (1, 1, 1)}
    D = polynomial_disk_preimage(Poly([Fraction(2, 3), 1]), Disk(1, 2, p))
    (c, m), = D.components
    assert c == Disk(Fraction(1, 3), 2, p) and m == 1


def test_point_parsing_roundtrip():
    for text in ("zeta(0, 3^1)", "zeta(2, 3^(-2))", "zeta(1, 3^(-1/2))", "zeta(5, 0)"):
        assert format_point(parse_point(text, 3)) == text
    assert parse_point("gauss", 3) == gauss(3)
    assert parse_point("inf", 3) is INF
    assert parse_point("zeta(0, 1/9)", 3) == z(3, 0, 2)
    assert parse_point("zeta(0, 9)", 3) == z(3, 0, -2)
    assert parse_point("zeta(0, 1/3)", 3).radius == Absolute.padic(3, 1)
    with pytest.raises(ValueError):
        parse_point("zeta(0, 2)", 3)


def test_point_kinds():
    assert BerkPoint.classical(1, 3).kind == "I"
    assert gauss(3).kind == "II"
    assert z(3, 0, Fraction(1, 2)).kind == "III"


# ---------------------------------------------------------------- properties


@given(rats, rats, exps)
def test_recentring_invariance(a, b, e):
    same = BerkPoint(a, e, 3) == BerkPoint(b, e, 3)
    assert same == (a == b or valuation(a - b, 3) >= e)


@given(pts(), pts(), pts())
def test_hsia_strong_triangle(S, T, U):
    assert hsia_infty(S, T) <= max(hsia_infty(S, U), hsia_infty(U, T))
    assert hsia_can(S, T) <= max(hsia_can(S, U), hsia_can(U, T))
    assert hsia_can(S, T) == hsia_can(T, S)
    assert hsia_can(S, T) <= ONE


@given(pts(), pts(), pts(), pts(classical=False))
def test_generalized_hsia_strong_triangle(S, T, U, S0):
    assert hsia(S, T, S0) <= max(hsia(S, U, S0), hsia(U, T, S0))
    assert hsia(S, T, S0) == hsia(T, S, S0)


@given(pts(classical=False), pts(classical=False))
def test_rho_is_tree_metric(S, T):
    rel, J = order_and_join(S, T)
    assert rho(S, T) == rho(S, J) + rho(J, T)
    assert hsia_infty(S, T) == J.radius


@st.composite
def rat_polys(draw, max_deg=6):
    n = draw(st.integers(min_value=1, max_value=max_deg))
    roots = draw(st.lists(st.fractions(min_value=-40, max_value=40, max_denominator=27), min_size=n, max_size=n))
    lead = draw(st.fractions(min_value=-30, max_value=30, max_denominator=9).filter(lambda c: c != 0))
    return Poly.from_roots(roots, lead), roots


@given(rat_polys(), st.sampled_from([2, 3, 5]), rats, st.integers(min_value=-3, max_value=4))
def test_newton_counts_match_brute_force(Pr, p, a, e):
    P, roots = Pr
    S = BerkPoint(a, e, p)
    brute = sum(1 for r in roots if r == S.center or valuation(r - S.center, p) >= e)
    assert count_roots_in_disk(P, S) == brute
    open_brute = sum(1 for r in roots if r == S.center or valuation(r - S.center, p) > e)
    assert count_roots_in_disk(P, S, strict=True) == open_brute


@given(rat_polys(3), rat_polys(3), st.sampled_from([2, 3, 5]), rats, exps)
def test_gauss_norm_multiplicative(A, B, p, a, e):
    P, Q = A[0], B[0]
    S = BerkPoint(a, e, p)
    assert gauss_norm(P * Q, S) == gauss_norm(P, S) * gauss_norm(Q, S)


@given(rat_polys(4), st.sampled_from([2, 3, 5]), rats, st.integers(min_value=-2, max_value=3))
def test_gauss_norm_is_sup_over_disk(Pr, p, a, e):
    # the sup of |P| over rational points of the disk is attained on a grid
    P, _ = Pr
    S = BerkPoint(a, e, p)
    best = max((gauss_norm(P, BerkPoint.classical(a + t * Fraction(p) ** e, p))
                for t in range(4 * p + 1)), key=lambda x: -x.v)
    assert best <= gauss_norm(P, S)


@given(rat_polys(4), st.sampled_from([3, 5]), rats, st.integers(min_value=0, max_value=3))
def test_disk_preimage_degrees(Pr, p, c, e):
    P, _ = Pr
    assume(P.degree >= 1)
    D = polynomial_disk_preimage(P, Disk(c, e, p))
    if D.complete:
        assert D.total_degree == P.degree
    for comp, deg in D.components:
        # the image of each component's boundary point is the target boundary
        assert gauss_norm(P - Poly([c]), comp.boundary) == Absolute.padic(p, e)
        assert 1 <= deg <= P.degree
