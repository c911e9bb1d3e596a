import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from greenline.archimedean import (
    BudgetExceeded,
    GreenEvaluator,
    T_F,
    escape_rate,
    escapes_to_infinity,
    fixed_points,
    green_grid,
    lambda_at_infinity,
    preimage_measure,
)
from greenline.fields import INF, ComplexField
from greenline.lifts import HomogeneousLift, RationalMap
from greenline.measures import CINF
from greenline.poly import Poly
from greenline.potential import potential

C = ComplexField()


def cmap(text):
    return RationalMap.parse(text, C)


def z2_green(z):
    z = np.asarray(z, dtype=complex)
    return np.log(np.maximum(1.0, np.abs(z))) - 0.5 * np.log1p(np.abs(z) ** 2)


def test_escape_rate_examples():
    F = cmap("z^2").lift
    for n in (1, 5, 40):
        assert escape_rate(F, 0, n) == pytest.approx(0.0, abs=1e-15)
        assert escape_rate(F, INF, n) == pytest.approx(0.0, abs=1e-15)
    assert escape_rate(F, 2, 60) == pytest.approx(math.log(2) - 0.5 * math.log(5), abs=1e-12)


def test_green_closed_form_for_z2():
    G = GreenEvaluator.normalized(cmap("z^2"))
    rng = np.random.default_rng(1)
    z = rng.normal(size=200) * 3 + 1j * rng.normal(size=200) * 3
    assert np.max(np.abs(G(z) - z2_green(z))) < 1e-10
    assert G(INF) == pytest.approx(0.0, abs=1e-15)


def test_green_of_rescaled_lift():
    f = cmap("z^2/2")
    F2 = f.lift                                   # (2 p0^2, p1^2)
    Fh = HomogeneousLift(Poly([1 + 0j]), Poly([0j, 0j, 0.5 + 0j]), 2, C)  # (p0^2, p1^2 / 2)
    z = np.array([0.1, 1 + 1j, 3 - 2j, -5j])
    g2 = GreenEvaluator(f, lift=F2).lift_green(z)
    gh = GreenEvaluator(f, lift=Fh).lift_green(z)
    # g_{cF} = g_F + log|c|/(d-1), here F2 = 2 Fh
    assert np.allclose(g2 - gh, math.log(2), atol=1e-12)
    # g_f does not depend on the lift
    assert np.allclose(GreenEvaluator(f, lift=F2)(z), GreenEvaluator(f, lift=Fh)(z), atol=1e-12)


@pytest.mark.parametrize("text", ["z^2 + 0.3 - 0.2I", "z^3 - 0.5z", "(z^2 + 1)/(2z - 1)", "z + 1/z"])
def test_green_functional_equation(text):
    f = cmap(text)
    G = GreenEvaluator(f)
    rng = np.random.default_rng(7)
    z = rng.normal(size=100) * 2 + 1j * rng.normal(size=100) * 2
    fz = np.array([complex(f(complex(t))) if f(complex(t)) is not INF else CINF for t in z])
    r = f.d * G.lift_green(z) - G.lift_green(fz) - T_F(G.lift, z)
    assert np.max(np.abs(r)) < 1e-9


def test_green_eps_guard():
    G = GreenEvaluator(cmap("z^2 + 1"))
    with pytest.raises(ValueError):
        G(0.5, eps=1e-16)
    assert G.iterations_for(1e-6) < G.iterations_for(1e-12)


def test_green_grid_conventions():
    G = GreenEvaluator.normalized(cmap("z^2"))
    grid, xs, ys = green_grid(G, (-2, 2, -1, 1), 5)
    assert grid.shape == (5, 5)
    assert grid[0, 0] == pytest.approx(z2_green(-2 - 1j))
    assert grid[4, 0] == pytest.approx(z2_green(-2 + 1j))
    one, _, _ = green_grid(G, (-2, 2, -1, 1), 1)
    assert one.shape == (1, 1) and one[0, 0] == pytest.approx(z2_green(-2 - 1j))
    with pytest.raises(ValueError):
        green_grid(G, (1, 1, 0, 1), 4)


def test_preimage_measure_roots_of_unity():
    mu = preimage_measure(cmap("z^2"), 1, 3)
    assert len(mu) == 8
    assert np.allclose(mu.masses, 1 / 8)
    assert np.allclose(mu.points ** 8, 1)
    assert len(np.unique(np.round(mu.points, 9))) == 8


def test_preimage_measure_total_mass_and_budget():
    mu = preimage_measure(cmap("z^3 - 0.5z"), None, 5)
    assert mu.masses.sum() == pytest.approx(1.0)
    with pytest.raises(BudgetExceeded):
        preimage_measure(cmap("z^3"), None, 11)
    mu = preimage_measure(cmap("z^3 - 0.5z"), None, 11, max_atoms=1000)
    assert len(mu) == 1000 and mu.masses.sum() == pytest.approx(1.0)


def test_preimage_measure_seed_independence():
    f = cmap("z^2")
    a = preimage_measure(f, 0.5 + 0.5j, 12)
    b = preimage_measure(f, -1.3 + 0.2j, 12)
    rng = np.random.default_rng(3)
    r = rng.uniform(1.5, 4, 4096)
    z = r * np.exp(2j * np.pi * rng.uniform(size=4096))
    pa, pb = potential(a, INF, z), potential(b, INF, z)
    assert np.max(np.abs(pa - pb)) < 5e-3
    assert np.max(np.abs(pa - np.log(np.abs(z)))) < 5e-3


def test_preimage_measure_atoms_at_infinity():
    # 1/z^2 maps 0 to infinity, so preimages of 0 lie at infinity
    mu = preimage_measure(cmap("1/z^2"), 0, 1)
    assert np.isinf(mu.points.real).all()


def test_lambda_at_infinity():
    assert lambda_at_infinity(cmap("z^2")) == 0
    assert complex(lambda_at_infinity(cmap("z + 1/z"))) == pytest.approx(1)
    assert complex(lambda_at_infinity(cmap("2z + 1/z"))) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        lambda_at_infinity(cmap("1/z^2"))


def test_fixed_points_and_escape():
    z, mult = fixed_points(cmap("z^2"))
    assert sorted(np.round(np.abs(z), 12)) == [0.0, 1.0]
    assert sorted(np.round(np.abs(mult), 12)) == [0.0, 2.0]
    esc = escapes_to_infinity(cmap("z^2"), np.array([0.5, 2.0]))
    assert list(esc) == [False, True]


@given(st.floats(min_value=-1, max_value=1), st.floats(min_value=-1, max_value=1))
def test_z2_green_is_nonpositive(a, b):
    # log+|z| <= log||(1, z)||
    G = GreenEvaluator.normalized(cmap("z^2"))
    z = complex(3 * a, 3 * b)
    assert G(z) <= 0.0 + 1e-12
