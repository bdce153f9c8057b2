import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate

from filtered_azema import filters as flt
from filtered_azema.filters import ConstantMode, MeanderConstant, MomentMode
from filtered_azema.paths import Seed, TimeGrid
from filtered_azema.solvers import solve_first_kind_exact, solve_second_kind

tg = st.tuples(st.floats(0.05, 5.0), st.floats(0.01, 0.99)).map(lambda p: (p[0], p[0] * p[1]))


def test_constants():
    assert MeanderConstant.oracle_derived().c_A == pytest.approx(math.sqrt(math.pi / 2))
    assert MeanderConstant.paper_verbatim().c_A == pytest.approx(math.pi / 2)
    assert MeanderConstant.from_mode(ConstantMode.PAPER_VERBATIM).mode == ConstantMode.PAPER_VERBATIM
    # with the Rayleigh mean, the second-kind coefficient is sqrt(pi/2) * 2/pi = sqrt(2/pi)
    assert flt.DEFAULT_CONSTANT.c_nu == pytest.approx(math.sqrt(2 / math.pi))


def test_sign_posterior_and_first_kind_value():
    assert flt.sign_posterior(0.0, 2.0) == 0.0
    assert flt.sign_posterior(1e6, 1.0) == pytest.approx(1.0)
    v = flt.first_kind_value(0.4, 0.7, 1.3)
    assert v == pytest.approx(math.sqrt(0.8 / math.pi) * math.tanh(0.91))
    assert v == pytest.approx(0.36390244858, abs=1e-10)


def test_density_alpha_zero_is_heat_kernel():
    x = np.linspace(-5, 5, 101)
    np.testing.assert_allclose(flt.conditional_density_first_kind(1.3, x, 0.8, 0.6, 0.0),
                               flt.heat_kernel(1.3, x), atol=1e-12)


def test_density_limit_g_equals_t():
    x = np.array([-1.0, 1.0])
    d = flt.conditional_density_first_kind(1.0, x, 0.5, 1.0, 1.0)
    np.testing.assert_allclose(d, flt.heat_kernel(1.0, x) * (1 + math.tanh(0.5) * np.sign(x)))


@settings(max_examples=40, deadline=None)
@given(tg=tg, y=st.floats(-3, 3), a=st.floats(-3, 3))
def test_density_normalised_with_filter_mean(tg, y, a):
    t, g = tg
    f = lambda x: flt.conditional_density_first_kind(t, x, y, g, a)
    mass = integrate.quad(f, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12)[0]
    m1 = integrate.quad(lambda x: x * f(x), -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12)[0]
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert m1 == pytest.approx(flt.first_kind_value(g, y, a), abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(tg=tg, y=st.floats(-3, 3), a=st.floats(-3, 3), x=st.floats(0, 6))
def test_density_odd_symmetry(tg, y, a, x):
    # p(x | y) = p(-x | -y): flipping Y mirrors the law of W_t
    t, g = tg
    lhs = flt.conditional_density_first_kind(t, x, y, g, a)
    rhs = flt.conditional_density_first_kind(t, -x, -y, g, a)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@settings(max_examples=30, deadline=None)
@given(tg=tg, y=st.floats(-2, 2), a=st.floats(-2, 2), n=st.integers(0, 6))
def test_moments_match_density_quadrature(tg, y, a, n):
    t, g = tg
    f = lambda x: x ** n * flt.conditional_density_first_kind(t, x, y, g, a)
    ref = integrate.quad(f, -np.inf, np.inf, epsabs=1e-11, epsrel=1e-11)[0]
    got = flt.conditional_moment_first_kind(n, t, g, y, a)
    assert got == pytest.approx(ref, rel=1e-7, abs=1e-9)


def test_moment_table_frozen_values():
    # (t, g, y, alpha) = (1, 0.4, 0.7, 1.3)
    ex = [flt.conditional_moment_first_kind(n, 1.0, 0.4, 0.7, 1.3) for n in range(5)]
    assert ex[0] == pytest.approx(1.0)
    assert ex[1] == pytest.approx(0.3639024485877253, abs=1e-12)
    assert ex[2] == pytest.approx(1.0)
    assert ex[4] == pytest.approx(3.0)
    pv = flt.conditional_moment_first_kind(0, 1.0, 0.4, 0.7, 1.3, MomentMode.PAPER_VERBATIM)
    assert pv == pytest.approx(1 / math.sqrt(math.pi))
    pv1 = flt.conditional_moment_first_kind(1, 1.0, 0.4, 0.7, 1.3, MomentMode.PAPER_VERBATIM)
    assert pv1 == pytest.approx(ex[1])


@pytest.mark.parametrize("bad", [dict(n=-1), dict(n=1.5), dict(n=13), dict(t=0.0),
                                 dict(g=2.0)])
def test_moment_rejects_bad_input(bad):
    kw = dict(n=2, t=1.0, g=0.5)
    kw.update(bad)
    with pytest.raises(ValueError):
        flt.conditional_moment_first_kind(kw["n"], kw["t"], kw["g"], 0.1, 1.0)


def test_conditional_law_second_kind_basics():
    c = flt.DEFAULT_CONSTANT
    one = flt.conditional_law_second_kind(lambda x: np.ones_like(x), 1.0, 0.6, 1)
    assert one == pytest.approx(1.0, abs=1e-6)
    m = flt.conditional_law_second_kind(lambda x: x, 1.0, 0.6, -1)
    assert m == pytest.approx(-c.c_nu * math.sqrt(0.6), abs=1e-5)
    pos = flt.conditional_law_second_kind(lambda x: (x > 0).astype(float), 1.0, 0.6, 1,
                                          quad=flt.QuadratureParams(tol=1e-3))
    assert 0.5 < pos < 1.0
    # scalar-only callables are accepted too
    sq = flt.conditional_law_second_kind(lambda x: float(x) ** 2, 1.0, 1.0, 1,
                                         quad=flt.QuadratureParams(theta_nodes=48, y_nodes=48))
    assert sq > 0
    with pytest.raises(ValueError):
        flt.conditional_law_second_kind(lambda x: x, 1.0, 0.0, 1)
    with pytest.raises(ValueError):
        flt.conditional_law_second_kind(lambda x: x, 1.0, 0.5, 0)
    with pytest.raises(ValueError):
        flt.conditional_law_second_kind(lambda x: np.full_like(x, np.nan), 1.0, 0.5, 1)


def test_quadrature_error_on_nonconvergence():
    q = flt.QuadratureParams(theta_nodes=2, y_nodes=2, hermite_nodes=2, tol=1e-15,
                             max_doublings=0)
    with pytest.raises(flt.QuadratureError):
        flt.conditional_law_second_kind(np.cos, 1.0, 0.5, 1, quad=q)


def test_filter_series_piecewise_constant_between_zeros():
    grid = TimeGrid.from_dt(1.0, 1e-3)
    sc = solve_second_kind(grid, Seed(5, 2), 0.5)
    ser = flt.second_kind_series(sc)
    changes = np.flatnonzero(np.diff(ser.values) != 0) + 1
    assert np.all(sc.zero_event[changes])
    assert ser.to_csv().startswith("t,g,value\n")
    with pytest.raises(ValueError):
        flt.first_kind_series(sc)


def test_point_filters():
    grid = TimeGrid.from_dt(1.0, 1e-2)
    sc = solve_first_kind_exact(grid, Seed(1), 1.0)
    v = flt.filter_first_kind(sc, 0.5)
    i = grid.index(0.5)
    assert v == pytest.approx(flt.first_kind_value(sc.g[i], sc.Y[i], 1.0))
    sc2 = solve_second_kind(grid, Seed(1), 0.5)
    assert flt.filter_second_kind(sc2, 1.0) == pytest.approx(
        sc2.sign_state[-1] * flt.DEFAULT_CONSTANT.c_nu * math.sqrt(sc2.g[-1]))
