import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from filtered_azema import paths
from filtered_azema.paths import SamplePath, Seed, TimeGrid


def test_grid_from_dt_and_index():
    g = TimeGrid.from_dt(1.0, 1e-3)
    assert g.n_steps == 1000
    assert g.index(0.25) == 250
    assert g.times[-1] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        g.index(0.2505)
    with pytest.raises(ValueError):
        TimeGrid.from_dt(1.0, 0.3)
    with pytest.raises(ValueError):
        TimeGrid(-1.0, 10)


def test_seed_rejects_out_of_range():
    with pytest.raises(ValueError):
        Seed(-1)
    with pytest.raises(ValueError):
        Seed(0, 2 ** 64)


def test_bm_is_reproducible_and_stream_independent():
    g = TimeGrid.from_dt(1.0, 0.01)
    a = paths.bm_batch(g, 7, [0, 1, 2])
    b = paths.bm_batch(g, 7, [2, 1, 0])
    np.testing.assert_array_equal(a, b[::-1])
    # a single stream drawn alone equals its row in a batch
    np.testing.assert_array_equal(paths.simulate_bm(g, Seed(7, 1)).values, a[1])
    assert a[0, 0] == 0.0


def test_lanes_are_distinct_streams():
    g = TimeGrid.from_dt(1.0, 0.01)
    w = paths.bm_batch(g, 3, [0], paths.LANE_W)
    b = paths.bm_batch(g, 3, [0], paths.LANE_B)
    assert not np.allclose(w, b)


def test_drift_shares_increments():
    g = TimeGrid.from_dt(2.0, 0.01)
    s = Seed(11, 4)
    d = paths.simulate_bm_drift(g, s, 0.7).values - paths.simulate_bm(g, s).values
    np.testing.assert_allclose(d, 0.7 * g.times, atol=1e-12)


def test_bm_terminal_law():
    g = TimeGrid.from_dt(1.0, 0.05)
    x = paths.terminal_values(paths.bm_batch, g, 5, 20_000)
    assert stats.kstest(x, "norm").pvalue > 0.001


@pytest.mark.parametrize("alpha", [1.5, -1.01, math.nan])
def test_skew_rejects_large_alpha(alpha):
    g = TimeGrid.from_dt(1.0, 0.1)
    with pytest.raises(ValueError, match=r"\|alpha\| <= 1"):
        paths.simulate_skew_bm(g, Seed(1), alpha)


def test_skew_alpha_zero_is_symmetric_and_alpha_one_reflects():
    g = TimeGrid.from_dt(1.0, 0.01)
    x = paths.skew_bm_batch(g, 2, range(300), 1.0)
    assert np.all(x >= 0)
    x = paths.skew_bm_batch(g, 2, range(300), -1.0)
    assert np.all(x <= 0)


def test_skew_positive_fraction():
    # P(X_1 > 0) = (1 + alpha) / 2
    g = TimeGrid.from_dt(1.0, 0.01)
    x = paths.terminal_values(paths.skew_bm_batch, g, 9, 20_000, alpha=0.4)
    p = np.mean(x > 0)
    assert abs(p - 0.7) < 4 * math.sqrt(0.21 / 20_000)


def test_skew_euler_matches_construction_in_law():
    g = TimeGrid.from_dt(1.0, 1e-3)
    e = paths.terminal_values(paths.skew_bm_euler_batch, g, 4, 8000, alpha=0.5)
    assert abs(np.mean(e > 0) - 0.75) < 4 * math.sqrt(0.75 * 0.25 / 8000)


def test_sample_path_csv_round_trip_and_comment_lines():
    g = TimeGrid.from_dt(1.0, 0.25)
    p = SamplePath(g, [0.0, 0.1, -0.2, 0.3, 0.0])
    text = p.to_csv()
    assert text.splitlines()[0] == "t,value"
    q = SamplePath.from_csv("# provenance\n" + text)
    np.testing.assert_array_equal(q.values, p.values)
    with pytest.raises(ValueError):
        SamplePath(g, [0.0, 1.0])


@settings(max_examples=30, deadline=None)
@given(root=st.integers(0, 2 ** 64 - 1), stream=st.integers(0, 2 ** 64 - 1),
       alpha=st.floats(-1, 1))
def test_skew_modulus_is_reflected_driver(root, stream, alpha):
    # flipping excursion signs never changes |X|
    g = TimeGrid.from_dt(1.0, 0.05)
    x = paths.skew_bm_batch(g, root, [stream], alpha)
    b = paths.bm_batch(g, root, [stream])
    np.testing.assert_array_equal(np.abs(x), np.abs(b))


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 400), chunk=st.integers(1, 50), start=st.integers(0, 10 ** 6))
def test_iter_streams_partitions(n, chunk, start):
    got = [s for r in paths.iter_streams(n, chunk, start) for s in r]
    assert got == list(range(start, start + n))
