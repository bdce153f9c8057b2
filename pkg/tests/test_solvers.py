import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from filtered_azema import functionals as fn
from filtered_azema import solvers
from filtered_azema.paths import Seed, TimeGrid
from filtered_azema.solvers import ScenarioKind, ScenarioStream, scenario_batch

GRID = TimeGrid.from_dt(1.0, 1e-2)


@pytest.mark.parametrize("kind,alpha", [("first-exact", 1.0), ("first-euler", 0.7),
                                        ("second", 0.5), ("z", 0.0)])
def test_batch_layout_and_sign_structure(kind, alpha):
    b = scenario_batch(kind, GRID, 3, range(50), alpha)
    shape = (50, GRID.n_steps + 1)
    for arr in (b.W, b.B, b.Y, b.sign_state, b.g, b.zero_event, b.zero_time):
        assert arr.shape == shape
    assert set(np.unique(b.sign_state)) <= {-1.0, 1.0}
    # the sign only changes at zero events of the observation
    flips = np.diff(b.sign_state, axis=1) != 0
    assert not np.any(flips & ~b.zero_event[:, 1:])
    # g is nondecreasing and never ahead of t
    assert np.all(np.diff(b.g, axis=1) >= 0)
    assert np.all(b.g <= GRID.times + 1e-12)
    # the observation vanishes exactly where its driver does
    assert np.all(b.zero_event[:, 0])


def test_first_exact_is_signed_drifted_driver():
    b = scenario_batch("first-exact", GRID, 5, range(20), 0.8)
    drifted = b.B + 0.8 * GRID.times
    np.testing.assert_allclose(b.Y, b.sign_state * drifted)


def test_second_kind_uses_skew_driver():
    b = scenario_batch("second", GRID, 5, range(20), 0.3)
    np.testing.assert_array_equal(np.abs(b.X), np.abs(b.B))
    np.testing.assert_allclose(b.Y, b.sign_state * b.X)


def test_second_kind_rejects_large_alpha():
    with pytest.raises(ValueError, match=r"\|alpha\| <= 1"):
        solvers.solve_second_kind(GRID, Seed(1), 1.2)
    with pytest.raises(ValueError):
        ScenarioStream("second", GRID, -3.0, 1, 10)


def test_single_path_matches_batch_row():
    b = scenario_batch("second", GRID, 9, [4, 5, 6], 0.5)
    one = solvers.solve_second_kind(GRID, Seed(9, 5), 0.5)
    np.testing.assert_array_equal(one.Y, b.Y[1])
    np.testing.assert_array_equal(one.sign_state, b.sign_state[1])


def test_euler_drift_follows_sign_state():
    b = scenario_batch("first-euler", GRID, 2, range(30), 1.3)
    drift = np.diff(b.Y - b.B, axis=1)
    np.testing.assert_allclose(drift, 1.3 * GRID.dt * b.sign_state[:, :-1], atol=1e-12)


def test_zero_times_lie_in_their_steps():
    b = scenario_batch("first-exact", GRID, 1, range(40), 0.0)
    for k in range(5):
        idx = np.flatnonzero(b.zero_event[k])
        z = b.zero_times(k)
        assert np.all(z <= idx * GRID.dt + 1e-12)
        assert np.all(z >= (idx - 1) * GRID.dt - 1e-12)


def test_no_bridge_uses_grid_sign_changes():
    b = scenario_batch("first-exact", GRID, 1, range(10), 0.5, bridge=False)
    np.testing.assert_array_equal(b.zero_event, fn.zero_events(b.B + 0.5 * GRID.times))


def test_csv_schema():
    sc = solvers.solve_second_kind(GRID, Seed(3), 0.5)
    lines = sc.to_csv().splitlines()
    assert lines[0] == "t,W,B,Y,X,sign_state"
    assert len(lines) == GRID.n_steps + 2
    assert solvers.solve_first_kind_exact(GRID, Seed(3), 1.0).to_csv().startswith("t,W,B,Y,sign")


@settings(max_examples=8, deadline=None)
@given(n=st.integers(1, 40), chunk=st.integers(1, 15), threads=st.integers(1, 3))
def test_stream_is_chunk_and_thread_invariant(n, chunk, threads):
    s = ScenarioStream("first-exact", GRID, 1.0, 17, n, chunk=chunk, threads=threads)
    y = np.concatenate([b.Y[:, -1] for b in s])
    ref = scenario_batch("first-exact", GRID, 17, range(n), 1.0).Y[:, -1]
    np.testing.assert_array_equal(y, ref)


def test_provenance_and_thread_env(monkeypatch):
    s = ScenarioStream("z", GRID, 0.0, 4, 10)
    assert s.provenance["kind"] == "z" and s.provenance["n_paths"] == 10
    monkeypatch.setenv(solvers.THREADS_ENV, "3")
    assert solvers.default_threads() == 3
    monkeypatch.setenv(solvers.THREADS_ENV, "x")
    assert solvers.default_threads() == 1


def test_first_kind_terminal_sign_posterior():
    # P(sign_state = +1 | Y_t) = (1 + tanh(alpha Y_t)) / 2, checked on average
    b = scenario_batch("first-exact", GRID, 8, range(4000), 1.0)
    d = (b.sign_state[:, -1] > 0) - 0.5 * (1 + np.tanh(b.Y[:, -1]))
    assert abs(d.mean()) < 4 * d.std() / math.sqrt(d.size)
