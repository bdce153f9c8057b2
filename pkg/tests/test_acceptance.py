"""
Acceptance suite at full scale: one ``CRITERION k PASS|FAIL`` line per
criterion, with the measured runtime against its limit.

The lines are printed as each criterion finishes (visible with ``-s``) and
repeated in the pytest terminal summary.  Run a subset with
``pytest tests/test_acceptance.py -k c07``, or everything standalone with
``python tests/test_acceptance.py``.
"""
import math
import time
import warnings

import pytest

from filtered_azema import experiments as exps
from filtered_azema import filters as flt

CRITERION_LINES: list[str] = []


def _cfg(name, **kw):
    return exps.ExperimentConfig(name, **kw)


def _criterion(k: int, title: str, run, limit_s: float, select=None):
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        reports = run()
    elapsed = time.perf_counter() - t0
    if select is not None:
        reports = [r for r in reports if select(r)]
    stat_ok = bool(reports) and all(r.passed for r in reports)
    ok = stat_ok and elapsed < limit_s
    why = "" if ok else (" [statistical]" if not stat_ok else " [runtime]")
    line = (f"CRITERION {k:2d} {'PASS' if ok else 'FAIL'}{why} {title}: "
            f"{sum(r.passed for r in reports)}/{len(reports)} reports, "
            f"{elapsed:.1f}s (limit {limit_s:.0f}s)")
    CRITERION_LINES.append(line)
    print("\n" + line)
    for r in reports:
        print("    " + r.line())
    return ok, reports


def test_c01_density_normalization():
    ok, _ = _criterion(1, "density normalization on the 5^4 lattice",
                       lambda: exps.density_lattice(_cfg("density"), ("normalization",)), 10)
    assert ok


def test_c02_density_first_moment():
    ok, _ = _criterion(2, "quadrature first moment equals the first-kind filter",
                       lambda: exps.density_lattice(_cfg("density"), ("first-moment",)), 10)
    assert ok


def test_c03_first_kind_projection():
    ok, _ = _criterion(3, "first-kind projection battery, alpha in {0.5, 1}, N=2e5",
                       lambda: exps.first_kind_filter(_cfg("first-kind-filter")), 300)
    assert ok


def test_c04_sign_posterior():
    ok, _ = _criterion(4, "sign posterior equals tanh(alpha Y), N=2e5",
                       lambda: exps.sign_posterior(_cfg("sign-posterior")), 180)
    assert ok


def test_c05_innovation():
    ok, _ = _criterion(5, "innovation QV, normality and orthogonality, N=1e5",
                       lambda: exps.innovation(_cfg("innovation")), 180)
    assert ok


def test_c06_gamma_independence():
    ok, _ = _criterion(6, "gamma_1 independent of the observation, t=2, N=1e5",
                       lambda: exps.gamma_independence(_cfg("gamma-independence")), 180)
    assert ok


def test_c07_constant_calibration():
    ok, reports = _criterion(7, "meander constant calibration, N=1e5, dt=1e-4",
                             lambda: exps.calibrate_constant(_cfg("calibrate-constant")), 300)
    main = reports[0]
    selected = main.params.get("selected")
    default_matches = (selected is not None
                       and math.isclose(exps.orc.CANDIDATES[selected], flt.DEFAULT_CONSTANT.c_A))
    print(f"    selected constant: {selected}; filter default c_A = {flt.DEFAULT_CONSTANT.c_A:.6f}")
    assert ok and default_matches


def test_c08_second_kind_projection():
    # the earlier-sign prediction reports explain a failure here; they are
    # diagnostics, not part of the criterion
    ok, _ = _criterion(8, "second-kind projection incl. earlier signs, N=2e5",
                       lambda: exps.second_kind_filter(_cfg("second-kind-filter")), 300,
                       lambda r: not r.name.startswith("earlier-sign-prediction"))
    assert ok


def test_c09_structure_of_filter():
    ok, reports = _criterion(9, "piecewise constancy and jump frequency 1/2",
                             lambda: exps.jump_fairness(_cfg("jump-fairness")), 180,
                             lambda r: r.name != "jump-fairness:gaussian-prediction")
    assert all(r.params.get("excursions", 10 ** 5) >= 10 ** 5 for r in reports)
    assert ok


def test_c10_local_time_relation():
    ok, _ = _criterion(10, "local-time relation, alpha=0.8, dt=1e-4, 1e3 paths",
                       lambda: exps.local_time_relation(_cfg("local-time-relation")), 240)
    assert ok


def test_c11a_arcsine():
    ok, _ = _criterion(11, "arcsine law of g_1, N=1e5",
                       lambda: exps.arcsine(_cfg("arcsine")), 120)
    assert ok


def test_c11b_half_normal_and_gaussian():
    ok, _ = _criterion(11, "half-normal |Y_t| (second kind) and N(0,1) driftless Z_1, N=1e5",
                       lambda: exps.reflecting_law(_cfg("reflecting-law")), 240,
                       lambda r: r.name.startswith(("law:|Y", "law:Z_1~N")))
    assert ok


def test_c12_equality_in_law():
    ok, _ = _criterion(12, "Euler vs exact two-sample KS at three times, N=5e4",
                       lambda: exps.equality_in_law(_cfg("equality-in-law")), 240,
                       lambda r: r.name.startswith("weak-uniqueness:Y("))
    assert ok


def test_c13_sign_recovery():
    ok, _ = _criterion(13, "sign recovery >= 95% at dt=1e-5, monotone in dt",
                       lambda: exps.sign_recovery(_cfg("sign-recovery")), 600)
    assert ok


def test_c14_transience():
    ok, _ = _criterion(14, "transience: no zero in [50,100], terminal sign balance",
                       lambda: exps.transience(_cfg("transience")), 300)
    assert ok


def test_c15_balayage():
    ok, _ = _criterion(15, "balayage residual shrinks by >= 1.6 from dt to dt/4",
                       lambda: exps.balayage(_cfg("balayage")), 120,
                       lambda r: r.name == "balayage")
    assert ok


def test_c16_conditional_law_quadrature():
    ok, _ = _criterion(16, "second-kind conditional law: F=1 and F=identity",
                       lambda: exps.conditional_law(_cfg("density")), 60,
                       lambda r: r.name in ("conditional-law:total-mass",
                                            "conditional-law:mean-equals-filter"))
    assert ok


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-v", "-s"]))
