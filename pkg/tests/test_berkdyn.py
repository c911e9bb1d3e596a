from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from greenline.berkdyn import (
    DescentFailure,
    InexactBranch,
    berk_equilibrium_check,
    detect_reduction,
    invert_point,
    map_point,
    pullback_point_mass,
)
from greenline.berkovich import BerkPoint, gauss, gauss_norm, hsia_infty
from greenline.fields import INF, Absolute, PAdicField
from greenline.lifts import RationalMap, moebius
from greenline.poly import Poly

Q3 = PAdicField(3)
rats = st.fractions(min_value=-30, max_value=30, max_denominator=9)
type2 = st.builds(lambda a, e: BerkPoint(a, e, 3), rats, st.integers(min_value=-3, max_value=3))


def qmap(text, p=3):
    return RationalMap.parse(text, PAdicField(p))


def Z(a, e, p=3):
    return BerkPoint(Fraction(a), Fraction(e), p)


def test_map_point_examples():
    p = 3
    mp = map_point(qmap("z^2"), gauss(p))
    assert mp.image == gauss(p) and mp.local_degree == 2
    mp = map_point(qmap("3z^2"), Z(0, -1))
    assert mp.image == Z(0, -1) and mp.local_degree == 2
    mp = map_point(qmap("1/z"), Z(0, 1))
    assert mp.image == Z(0, -1) and mp.local_degree == 1


def test_map_point_classical_and_infinity():
    f = qmap("z^2 + 1/z")
    # near infinity z^2 + 1/z behaves like z^2
    assert map_point(f, INF).image is INF and map_point(f, INF).local_degree == 2
    mp = map_point(f, BerkPoint.classical(0, 3))
    assert mp.image is INF and mp.local_degree == 1
    mp = map_point(qmap("z^3"), BerkPoint.classical(0, 3))
    assert mp.local_degree == 3


def test_map_point_rational_branches():
    # poles outside the disk
    mp = map_point(qmap("(z^2 + 1)/(z - 9)"), Z(1, 1))
    assert mp.method == "pole-free-disk"
    # zeros and poles both inside the Gauss disk
    mp = map_point(qmap("(z^3 + 1)/(z^2 - 2)"), gauss(3))
    assert mp.method == "descent-verified"
    assert mp.image == gauss(3) and mp.local_degree == 3
    # (z - 1)(z + 1)/(z - 2) reduces to z - 1 mod 3
    mp = map_point(qmap("(z^2 - 1)/(z - 2)"), gauss(3))
    assert mp.image == gauss(3) and mp.local_degree == 1


def test_invert_point():
    assert invert_point(Z(0, 1), 3) == Z(0, -1)
    assert invert_point(Z(9, 3), 3) == Z(Fraction(1, 9), -1)
    assert invert_point(INF, 3) == BerkPoint.classical(0, 3)


def test_pullback_examples():
    mu = pullback_point_mass(qmap("z^2"), gauss(3))
    assert list(mu.atoms()) == [(gauss(3), 2)]
    mu = pullback_point_mass(qmap("z^2"), BerkPoint.classical(1, 3))
    assert dict(mu.atoms()) == {BerkPoint.classical(1, 3): 1, BerkPoint.classical(-1, 3): 1}
    mu = pullback_point_mass(qmap("z^2 - 1/9"), Z(0, 3))
    assert dict(mu.atoms()) == {Z(Fraction(1, 3), 4): 1, Z(Fraction(-1, 3), 4): 1}
    with pytest.raises(InexactBranch):
        pullback_point_mass(qmap("z^2 - 1/3"), Z(0, 2))
    with pytest.raises(InexactBranch):
        pullback_point_mass(qmap("z^2"), BerkPoint.classical(2, 3))


def test_detect_reduction_examples():
    assert detect_reduction(qmap("z^2 + 1")).status == "good"
    r = detect_reduction(qmap("3z^2"))
    assert r.status == "potentially-good"
    assert r.witness == Z(0, -1)
    assert r.conjugate.describe() == "z^2"
    assert r.certificate["conjugate_has_good_reduction"]
    r = detect_reduction(qmap("z^2 + 1/3"), 10)
    assert r.status == "none-found"
    sizes = [Fraction(s) for s in r.certificate["gauss_orbit_log_sizes"]]
    assert len(sizes) == 11 and r.certificate["gauss_orbit_strictly_increasing"]
    assert sizes[:4] == [0, 1, 2, 4]


def test_berk_equilibrium_check_examples():
    assert berk_equilibrium_check(qmap("z^2"), gauss(3))["verified"]
    assert not berk_equilibrium_check(qmap("3z^2"), gauss(3))["verified"]
    assert berk_equilibrium_check(qmap("3z^2"), Z(0, -1))["verified"]


# ---------------------------------------------------------------- properties

@st.composite
def small_maps(draw):
    P = draw(st.lists(rats, min_size=2, max_size=4))
    Q = draw(st.lists(rats, min_size=1, max_size=3))
    assume(any(P) and any(Q))
    try:
        f = RationalMap.from_polys(Poly(P), Poly(Q), Q3)
    except ValueError:
        assume(False)
    assume(f.d >= 1)
    return f


@given(small_maps(), type2, rats)
def test_image_matches_seminorm(f, S, c):
    try:
        T = map_point(f, S).image
    except DescentFailure:
        assume(False)
    assume(T is not INF)
    P, Q = f.numerator, f.denominator
    # |h(f(S))| = |h o f|_S for h(z) = z - c
    lhs = hsia_infty(T, BerkPoint.classical(c, 3))
    rhs = gauss_norm(P - Q.scale(c), S) / gauss_norm(Q, S)
    assert lhs == rhs


@given(small_maps(), small_maps(), type2)
def test_map_point_functorial(f, g, S):
    try:
        A = map_point(g, map_point(f, S).image)
        B = map_point(g.compose(f), S)
        inner = map_point(f, S)
    except DescentFailure:
        assume(False)
    assert A.image == B.image
    assert B.local_degree == A.local_degree * inner.local_degree


@given(small_maps(), type2)
def test_local_degree_bounded(f, S):
    try:
        mp = map_point(f, S)
    except DescentFailure:
        assume(False)
    assert 1 <= mp.local_degree <= f.d


@given(st.sampled_from(["z^2 + 1", "3z^2", "z^2 + 1/3", "z^3 - 1/9"]),
       st.integers(min_value=-2, max_value=2), st.integers(min_value=-4, max_value=4))
def test_reduction_verdict_conjugation_invariant(text, k, b):
    f = qmap(text)
    m = moebius(Fraction(3) ** k, b, 0, 1, Q3)
    found = detect_reduction(f).status != "none-found"
    found_conj = detect_reduction(f.conjugate(m)).status != "none-found"
    assert found == found_conj


def test_seminorm_zero_radius_infinity():
    assert hsia_infty(Z(0, 0), Z(1, 0)) == Absolute.padic(3, 0)
