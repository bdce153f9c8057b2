"""
Pathwise functionals: sign convention, discrete zero sets, last and next zero,
excursion decomposition and local-time estimators.

Zero convention: the zero set of a sampled path consists of time 0, every grid
point where the path is exactly 0, and, for each pair of adjacent grid points
of strictly opposite sign, the linearly interpolated crossing time.  A zero
"event" at grid index ``i`` means a zero in ``(t_{i-1}, t_i]``; its *left index*
is the last grid index at or before the zero (``i - 1`` for a crossing, ``i``
for an exact grid zero).

The array helpers work along the last axis so they apply equally to one path
and to a ``(n_paths, n_steps + 1)`` batch.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .paths import SamplePath, TimeGrid


def sgn(x):
    """1 for ``x > 0`` and -1 for ``x <= 0`` (so ``sgn(0) == -1``).

    Works on scalars and arrays.
    """
    if np.ndim(x) == 0:
        return 1 if x > 0 else -1
    return np.where(np.asarray(x) > 0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# array helpers


def zero_events(values: np.ndarray) -> np.ndarray:
    """Boolean mask: a zero of the path lies in ``(t_{i-1}, t_i]`` (index 0 always)."""
    v = np.asarray(values)
    ev = np.empty(v.shape, dtype=bool)
    ev[..., 0] = True
    prev, cur = v[..., :-1], v[..., 1:]
    # compare signs, not the product, which underflows for tiny values
    ev[..., 1:] = (np.sign(prev) * np.sign(cur) < 0) | (cur == 0)
    return ev


def zero_event_times(values: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Time and left grid index of the zero at each event index.

    Entries at non-event indices are meaningless (time ``nan``, index ``-1``).
    """
    v = np.asarray(values, dtype=np.float64)
    ev = zero_events(v)
    n = v.shape[-1]
    idx = np.arange(n)
    times = np.full(v.shape, np.nan)
    left = np.full(v.shape, -1, dtype=np.int64)
    exact = ev & (v == 0)
    times[exact] = np.broadcast_to(idx * dt, v.shape)[exact]
    left[exact] = np.broadcast_to(idx, v.shape)[exact]
    cross = ev & ~exact
    if cross.any():
        prev = np.empty_like(v)
        prev[..., 0] = 0.0
        prev[..., 1:] = v[..., :-1]
        a, b = np.abs(prev[cross]), np.abs(v[cross])
        i = np.broadcast_to(idx, v.shape)[cross]
        times[cross] = (i - 1) * dt + dt * a / (a + b)
        left[cross] = i - 1
    return times, left


def last_zero_from_events(events: np.ndarray, times: np.ndarray,
                          left: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Running last zero ``g_{t_i}`` and its left grid index from zero events."""
    last = np.where(events, np.arange(events.shape[-1]), 0)
    np.maximum.accumulate(last, axis=-1, out=last)
    return np.take_along_axis(times, last, axis=-1), np.take_along_axis(left, last, axis=-1)


def track_last_zero(values: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Running last zero and left index under the grid (interpolation) convention."""
    times, left = zero_event_times(values, dt)
    return last_zero_from_events(zero_events(values), times, left)


def _inverse_gaussian(mu: np.ndarray, lam: np.ndarray, z: np.ndarray,
                      u: np.ndarray) -> np.ndarray:
    """Michael-Schucany-Haas transform of one normal and one uniform.

    Written as ``mu / (1 + q + sqrt(2q + q^2))`` to stay accurate for large
    ``mu``; ``mu = inf`` gives the Levy limit ``lam / z^2``.
    """
    nu = z * z
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        levy = lam / nu
        q = mu * nu / (2 * lam)
        # mu so large that q overflows is the Levy limit as well
        use_levy = np.isinf(mu) | np.isinf(q)
        x1 = mu / (1 + q + np.sqrt(2 * q + q * q))
        x1 = np.where(use_levy, levy, x1)
        pick_small = u * (mu + x1) <= mu
        pick_small = np.where(use_levy, True, pick_small)
        return np.where(pick_small, x1, mu * mu / x1)


def bridge_zero_events(values: np.ndarray, dt: float, u_hit: np.ndarray,
                       z: np.ndarray, u_loc: np.ndarray
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Zero events of the continuous path behind the grid values.

    Between grid points the path is a Brownian bridge (any constant drift
    drops out).  A step with endpoints of the same sign contains a zero with
    probability ``exp(-2 |a| |b| / dt)``; a sign change always does.  The last
    zero inside a step is sampled exactly: by time reversal, ``s = dt - (t_i -
    zero)`` is the first passage to 0 of a bridge from ``|b|`` to ``|a|``, and
    ``s / (dt - s)`` is inverse Gaussian with mean ``|b| / |a|`` and shape
    ``b^2 / dt``.

    ``u_hit``, ``z`` and ``u_loc`` hold one uniform, one normal and one
    uniform per step (shape ``(..., n_steps)``); they make the refinement a
    deterministic function of the path's random stream.

    Returns ``(events, times, left)`` shaped like ``values``.
    """
    v = np.asarray(values, dtype=np.float64)
    a = np.abs(v[..., :-1])
    b = np.abs(v[..., 1:])
    exact = b == 0
    cross = np.sign(v[..., :-1]) * np.sign(v[..., 1:]) < 0
    hit = exact | cross
    same = ~hit
    hit[same] = u_hit[same] < np.exp(-2.0 * a[same] * b[same] / dt)
    n = v.shape[-1]
    t_right = np.broadcast_to(np.arange(1, n) * dt, hit.shape)
    t_zero = np.full(hit.shape, np.nan)
    t_zero[exact] = t_right[exact]
    # the inverse Gaussian is only needed where a zero was found
    loc = hit & ~exact
    ah, bh = a[loc], b[loc]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        mu = np.where(ah > 0, bh / ah, np.inf)
        w = _inverse_gaussian(mu, bh * bh / dt, z[loc], u_loc[loc])
        back = dt * w / (1.0 + w)
    back = np.where(np.isfinite(back), back, dt)
    tr = t_right[loc]
    t_zero[loc] = np.clip(tr - back, tr - dt, tr)
    events = np.empty(v.shape, dtype=bool)
    events[..., 0] = True
    events[..., 1:] = hit
    times = np.full(v.shape, np.nan)
    times[..., 0] = 0.0
    times[..., 1:] = t_zero
    left = np.full(v.shape, -1, dtype=np.int64)
    left[..., 0] = 0
    left[..., 1:] = np.where(exact, np.arange(1, n), np.arange(n - 1))
    left[..., 1:] = np.where(hit, left[..., 1:], -1)
    return events, times, left


def read_at_left(values: np.ndarray, left: np.ndarray) -> np.ndarray:
    """``values`` at grid index ``left``; an exact 0 falls back to the next index.

    A continuous-law process is 0 on the grid only at ``t = 0``, where the
    sign carries no information; reading one step later keeps the sign
    symmetric.
    """
    v = np.take_along_axis(values, left, axis=-1)
    zero = v == 0
    if zero.any():
        nxt = np.minimum(left + 1, values.shape[-1] - 1)
        v = np.where(zero, np.take_along_axis(values, nxt, axis=-1), v)
    return v


def occupation_local_time(values: np.ndarray, dt: float,
                          epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative symmetric and right occupation estimators.

    ``L_k = dt / (2 eps) * #{i < k: |x_i| < eps}`` and
    ``l_k = dt / eps * #{i < k: 0 <= x_i < eps}``.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    v = np.asarray(values, dtype=np.float64)
    near = np.abs(v[..., :-1]) < epsilon
    right = near & (v[..., :-1] >= 0)
    sym = np.zeros(v.shape)
    rgt = np.zeros(v.shape)
    np.cumsum(near, axis=-1, out=sym[..., 1:])
    np.cumsum(right, axis=-1, out=rgt[..., 1:])
    sym *= dt / (2.0 * epsilon)
    rgt *= dt / epsilon
    return sym, rgt


def tanaka_local_time(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Discrete Tanaka residuals: symmetric ``|x_k| - sum sgn0(x_i) dx_i`` and
    right ``2 (x_k^+ - sum 1{x_i > 0} dx_i)``, with ``sgn0(0) = 0``."""
    v = np.asarray(values, dtype=np.float64)
    dx = np.diff(v, axis=-1)
    x = v[..., :-1]
    sym = np.zeros(v.shape)
    rgt = np.zeros(v.shape)
    np.cumsum(np.sign(x) * dx, axis=-1, out=sym[..., 1:])
    np.cumsum((x > 0) * dx, axis=-1, out=rgt[..., 1:])
    sym = np.abs(v) - sym
    rgt = 2.0 * (np.maximum(v, 0.0) - rgt)
    # increments are >= 0 analytically; clip cumulative rounding noise
    sym[..., 0] = 0.0
    rgt[..., 0] = 0.0
    return np.maximum.accumulate(sym, axis=-1), np.maximum.accumulate(rgt, axis=-1)


# ---------------------------------------------------------------------------
# path-level API


def zero_set(path: "SamplePath") -> np.ndarray:
    """Ordered zero times of ``path``; always starts with 0."""
    times, _ = zero_event_times(path.values, path.grid.dt)
    ev = zero_events(path.values)
    return times[ev]


def _check_t(path: "SamplePath", t: float) -> None:
    tm = path.grid.t_max
    if not (0 <= t <= tm * (1 + 1e-12)):
        raise ValueError(f"t={t} outside [0, {tm}]")


def last_zero(path: "SamplePath", t: float) -> float:
    """Largest zero ``<= t`` (``g_t``, or ``gamma_t`` when applied to W)."""
    _check_t(path, t)
    z = zero_set(path)
    k = np.searchsorted(z, t, side="right") - 1
    return float(z[max(k, 0)])


def next_zero(path: "SamplePath", t: float) -> float:
    """Smallest zero ``> t``; ``math.inf`` if none before the horizon."""
    _check_t(path, t)
    z = zero_set(path)
    k = np.searchsorted(z, t, side="right")
    return float(z[k]) if k < len(z) else math.inf


@dataclass
class ExcursionDecomposition:
    """Excursion intervals ``(start, end, sign)``; the last one may be open-ended."""

    intervals: list[tuple[float, float, int]]
    open_ended: bool = False

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["start", "end", "sign"])
        for a, b, s in self.intervals:
            w.writerow([repr(float(a)), repr(float(b)), int(s)])
        return buf.getvalue()


def excursion_ids(values: np.ndarray) -> np.ndarray:
    """Excursion label per grid point (0 at grid zeroes, 1, 2, ... otherwise).

    Labels count zero events up to and including the point, so two nonzero
    points share a label iff no zero separates them.
    """
    ev = zero_events(values)
    ids = np.cumsum(ev, axis=-1)
    return np.where(np.asarray(values) == 0, 0, ids)


def excursions(path: "SamplePath") -> ExcursionDecomposition:
    v = path.values
    dt = path.grid.dt
    times, _ = zero_event_times(v, dt)
    ev = zero_events(v)
    ev_idx = np.flatnonzero(ev)
    ids = np.cumsum(ev)
    nz = np.flatnonzero(v != 0)
    if nz.size == 0:
        return ExcursionDecomposition([])
    labels, first = np.unique(ids[nz], return_index=True)
    intervals = []
    for lab, fi in zip(labels, first):
        i0 = nz[fi]
        start = times[ev_idx[lab - 1]]
        end = times[ev_idx[lab]] if lab < len(ev_idx) else path.grid.t_max
        intervals.append((float(start), float(end), 1 if v[i0] > 0 else -1))
    open_ended = bool(v[-1] != 0)
    return ExcursionDecomposition(intervals, open_ended)


@dataclass
class LocalTimeSeries:
    grid: "TimeGrid"
    symmetric: np.ndarray
    right: np.ndarray
    epsilon: float | None


def local_time(path: "SamplePath", epsilon: float | None = None) -> LocalTimeSeries:
    """Occupation-time local time at 0; ``epsilon`` defaults to ``sqrt(dt)``."""
    dt = path.grid.dt
    eps = math.sqrt(dt) if epsilon is None else float(epsilon)
    sym, rgt = occupation_local_time(path.values, dt, eps)
    return LocalTimeSeries(path.grid, sym, rgt, eps)


def local_time_tanaka(path: "SamplePath") -> LocalTimeSeries:
    sym, rgt = tanaka_local_time(path.values)
    return LocalTimeSeries(path.grid, sym, rgt, None)
