import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from filtered_azema import filters as flt
from filtered_azema import oracle as orc
from filtered_azema.oracle import FilterName, McReport
from filtered_azema.paths import Seed, TimeGrid
from filtered_azema.solvers import ScenarioStream, scenario_batch

GRID = TimeGrid.from_dt(1.0, 1e-2)


def _stream(kind, alpha, n, root=1, grid=GRID, **kw):
    return ScenarioStream(kind, grid, alpha, root, n, **kw)


def test_report_serialisation():
    r = McReport("x", 10, 0.01, 0.5, 0.1, 5.0, math.nan, False, Seed(3, 0), {"a": np.float64(1)})
    d = json.loads(r.to_json())
    assert d["pass"] is False and d["p_value"] is None
    assert d["seed"] == {"root": 3, "stream": 0}
    assert d["ci95"] == pytest.approx([0.5 - 1.96 * 0.1, 0.5 + 1.96 * 0.1], abs=1e-3)
    assert orc.summary_line([r, r]) == "PASS 0/2"
    assert json.loads(orc.reports_to_json([r]))[0]["name"] == "x"
    assert r.line().startswith("FAIL x")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=200))
def test_fsum_mean_matches_numpy(xs):
    m, se = orc.fsum_mean(xs)
    assert m == pytest.approx(np.mean(xs), rel=1e-9, abs=1e-6)
    assert se == pytest.approx(np.std(xs, ddof=1) / math.sqrt(len(xs)), rel=1e-6, abs=1e-6)


def test_fsum_mean_is_order_exact():
    x = np.array([1e16, 1.0, -1e16, 1.0])
    assert orc.fsum_mean(x)[0] == 0.5


def test_mixed_streams_rejected():
    a = scenario_batch("first-exact", GRID, 1, range(5), 1.0)
    b = scenario_batch("first-exact", GRID, 1, range(5, 10), 0.5)
    with pytest.raises(ValueError):
        orc.test_projection([a, b], FilterName.FIRST_KIND, 1.0)


def test_family_rejects_sign_readers_for_first_kind():
    fam = orc.TestFunctionalFamily.from_names(["one", "s(t/2)"])
    b = scenario_batch("first-exact", GRID, 1, range(5), 1.0)
    with pytest.raises(ValueError):
        orc.test_projection(b, FilterName.FIRST_KIND, 1.0, family=fam)
    with pytest.raises(ValueError):
        orc.TestFunctionalFamily.from_names(["nope"])


def test_projection_reports_and_thread_invariance():
    reps1 = orc.test_projection(_stream("first-exact", 1.0, 600, chunk=100, threads=1),
                                FilterName.FIRST_KIND, 1.0)
    reps3 = orc.test_projection(_stream("first-exact", 1.0, 600, chunk=70, threads=3),
                                FilterName.FIRST_KIND, 1.0)
    assert [r.to_dict() for r in reps1] == [r.to_dict() for r in reps3]
    assert len(reps1) == len(orc.TestFunctionalFamily.default("first-exact").names)
    assert reps1[0].params["insufficient_n"]


def test_corrupted_filter_is_rejected():
    s = _stream("first-exact", 1.0, 5000)
    good, bad = orc.run_checks(s, orc.ProjectionCheck(FilterName.FIRST_KIND, 1.0),
                               orc.ProjectionCheck(FilterName.FIRST_KIND_CORRUPTED, 1.0))
    assert orc.max_abs_z(good) < 5
    assert orc.max_abs_z(bad) > 10


def test_run_checks_matches_wrappers():
    s = _stream("first-exact", 0.5, 400)
    one = orc.test_innovation(s, 1.0)
    both = orc.run_checks(s, orc.InnovationCheck(1.0), orc.InnovationCheck(1.0, "tanh2"))
    assert [r.to_dict() for r in one] == [r.to_dict() for r in both[0]]


def test_sign_posterior_passes_and_detects_wrong_alpha():
    s = _stream("first-exact", 1.0, 20_000, grid=TimeGrid.from_dt(1.0, 1e-2))
    r = orc.test_sign_posterior(s, 1.0, n_bins=20)
    assert r.passed, r.line()
    # pretend the paths came from a different alpha: the regression must fail
    blocks = list(s)
    for b in blocks:
        b.alpha = 0.3
    assert not orc.test_sign_posterior(blocks, 1.0, n_bins=20).passed


def test_innovation_increment_alpha_zero_is_y():
    Y = np.cumsum(np.random.default_rng(0).standard_normal((3, 11)), axis=1)
    np.testing.assert_allclose(orc.innovation_increments(Y, 0.0, 0.1), Y)
    with pytest.raises(KeyError):
        orc.innovation_increments(Y, 1.0, 0.1, "bogus")


def test_laws_and_ks():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(5000)
    assert orc.test_distribution(x, orc.Law.normal()).passed
    assert orc.test_distribution(np.abs(x), orc.Law.half_normal()).passed
    assert not orc.test_distribution(np.abs(x), orc.Law.normal()).passed
    u = np.sin(0.5 * math.pi * rng.random(5000)) ** 2
    assert orc.test_distribution(u, orc.Law.arcsine(1.0)).passed
    assert orc.Law.arcsine(2.0).cdf(np.array([0.0, 1.0, 2.0])) == pytest.approx([0, 0.5, 1])
    assert orc.test_two_sample(x, rng.standard_normal(5000)).passed


def test_calibration_selects_rayleigh_mean_on_exact_samples():
    # W_t given t - gamma_t = u is a signed meander end point: Rayleigh(sqrt(u))
    rng = np.random.default_rng(4)
    n = 50_000
    u = np.sin(0.5 * math.pi * rng.random(n)) ** 2
    w = np.sqrt(u) * np.sqrt(-2 * np.log(rng.random(n)))
    r = orc.calibrate_from_samples(w, u, 1.0, 0.0, Seed(4))
    assert r.passed and r.params["selected"] == "sqrt(pi/2)"
    assert orc.constant_from_report(r).c_A == pytest.approx(math.sqrt(math.pi / 2))
    r2 = orc.calibrate_from_samples(w * (math.pi / 2) / math.sqrt(math.pi / 2), u, 1.0, 0.0,
                                    Seed(4))
    assert r2.params["selected"] == "pi/2"


def test_gamma_independence_and_contrast():
    s = _stream("first-exact", 1.5, 4000, grid=TimeGrid.from_dt(2.0, 1e-2))
    reps = orc.test_gamma_independence(s, 2.0, contrasts=orc.CONTRAST_FUNCTIONALS)
    plain = [r for r in reps if not r.params.get("contrast")]
    contrast = [r for r in reps if r.params.get("contrast")]
    assert all(r.passed for r in plain), [r.line() for r in plain if not r.passed]
    # t - gamma_t(W) shares its zero with gamma_1 whenever W has no zero in (1, t)
    dep = [r for r in contrast if "t-gamma" in r.name and "chi2" in r.name]
    assert not dep[0].passed


def test_sign_recovery_rules():
    b = scenario_batch("first-exact", GRID, 1, range(3), 1.0)
    with pytest.raises(ValueError):
        orc.recover_signs_from_Y(b)
    b = scenario_batch("second", GRID, 1, range(3), 0.0)
    with pytest.raises(ValueError, match="alpha = 0"):
        orc.recover_signs_from_Y(b)


def test_sign_recovery_beats_chance_on_fine_grid():
    s = _stream("second", 0.8, 20, grid=TimeGrid.from_dt(1.0, 1e-4))
    r = orc.test_sign_recovery(s)
    assert r.estimate > 0.75


def test_piecewise_constancy_exact():
    r = orc.test_piecewise_constancy(_stream("second", 0.5, 200))
    assert r.passed and r.estimate == 0


def test_balayage_residual_identity_for_constant_kernel():
    Y = np.cumsum(np.random.default_rng(1).standard_normal((4, 50)), axis=1)
    K = np.ones_like(Y)
    np.testing.assert_allclose(orc.balayage_residual(Y, K), 0.0, atol=1e-12)


def test_local_time_relation_small():
    s = _stream("second", 0.8, 100, grid=TimeGrid.from_dt(1.0, 1e-3))
    r = orc.test_local_time_relation(s)
    assert abs(r.estimate) < 0.2


def test_earlier_sign_prediction_matches_at_small_n():
    s = _stream("second", 0.5, 4000)
    for r in orc.test_earlier_sign_prediction(s, 1.0):
        assert r.passed, r.line()


def test_jump_indicators_shapes():
    b = scenario_batch("second", GRID, 3, range(20), 0.5)
    n, f, p = orc.jump_indicators(b)
    assert n.shape == (20,) and np.all(f <= n) and np.all(p <= n + 1e-12)
