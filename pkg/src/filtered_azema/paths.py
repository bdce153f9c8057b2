"""
Seeded generation of the primitive processes on uniform time grids.

Every path is a pure function of ``(grid, seed, parameters)``.  Randomness comes
from a Philox counter-based generator keyed by ``(root, stream)``; independent
sub-streams ("lanes") are obtained by offsetting the high word of the counter,
so the Gaussian increments of a path and the Bernoulli signs of its excursions
never share draws, and nothing depends on the order in which paths are built.

Two layers are exposed:

* single-path functions (``simulate_bm`` ...) returning :class:`SamplePath`;
* ``*_batch`` functions returning ``(n_paths, n_steps + 1)`` arrays for a list
  of stream indices.  Row ``k`` of a batch is bit-identical to the single-path
  result for ``Seed(root, streams[k])``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import functionals

# counter lanes: one sub-stream per role
LANE_W = 0
LANE_B = 1
LANE_BETA = 2
LANE_SIGNS = 3
# bridge refinement of the zero set, one lane per process whose zeros matter
LANE_BRIDGE_W = 4
LANE_BRIDGE_B = 5
LANE_BRIDGE_BETA = 6

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_i = i * dt`` for ``i = 0..n_steps`` on ``[0, t_max]``."""

    t_max: float
    n_steps: int

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if not np.isfinite(self.t_max) or self.t_max <= 0:
            raise ValueError(f"t_max must be positive and finite, got {self.t_max!r}")
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "t_max", float(self.t_max))

    @classmethod
    def from_dt(cls, t_max: float, dt: float) -> "TimeGrid":
        n = int(round(t_max / dt))
        if n < 1 or abs(n * dt - t_max) > 1e-9 * max(t_max, 1.0):
            raise ValueError(f"t_max={t_max} is not a multiple of dt={dt}")
        return cls(t_max, n)

    @property
    def dt(self) -> float:
        return self.t_max / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def index(self, t: float) -> int:
        """Grid index of time ``t``; ``t`` must lie on the grid (up to rounding)."""
        if t < -1e-12 or t > self.t_max * (1 + 1e-12):
            raise ValueError(f"t={t} outside [0, {self.t_max}]")
        i = int(round(t / self.dt))
        if abs(i * self.dt - t) > 1e-9 * max(self.dt, abs(t)):
            raise ValueError(f"t={t} is not a grid point (dt={self.dt})")
        return i


@dataclass(frozen=True)
class Seed:
    """Root key plus stream (path) index; both unsigned 64-bit."""

    root: int
    stream: int = 0

    def __post_init__(self):
        for name in ("root", "stream"):
            v = getattr(self, name)
            if int(v) != v or not 0 <= v <= _UINT64_MAX:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")


def generator(seed: Seed, lane: int = LANE_W) -> np.random.Generator:
    """Philox generator for one (root, stream, lane) triple."""
    key = np.array([seed.root, seed.stream], dtype=np.uint64)
    counter = np.array([0, 0, 0, lane], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


@dataclass
class SamplePath:
    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.n_steps + 1,):
            raise ValueError(
                f"expected {self.grid.n_steps + 1} values, got shape {self.values.shape}")

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "value"])
        for t, v in zip(self.times, self.values):
            w.writerow([repr(float(t)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SamplePath":
        lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
        rows = list(csv.reader(lines))
        if rows[0] != ["t", "value"]:
            raise ValueError(f"bad header {rows[0]!r}")
        t = np.array([float(r[0]) for r in rows[1:]])
        v = np.array([float(r[1]) for r in rows[1:]])
        return cls(TimeGrid(float(t[-1]), len(t) - 1), v)


def _check_alpha_skew(alpha: float) -> None:
    if not abs(alpha) <= 1:
        raise ValueError(
            f"skew parameter must satisfy |alpha| <= 1 (no skew Brownian motion "
            f"exists otherwise), got alpha={alpha}")


# ---------------------------------------------------------------------------
# batch layer


def gaussian_increments(grid: TimeGrid, root: int, streams: Sequence[int],
                        lane: int = LANE_W) -> np.ndarray:
    """``(len(streams), n_steps)`` array of N(0, dt) increments."""
    n = grid.n_steps
    out = np.empty((len(streams), n))
    sd = np.sqrt(grid.dt)
    for k, s in enumerate(streams):
        out[k] = generator(Seed(root, s), lane).standard_normal(n)
    out *= sd
    return out


def _cumulate(increments: np.ndarray) -> np.ndarray:
    paths = np.zeros(increments.shape[:-1] + (increments.shape[-1] + 1,))
    np.cumsum(increments, axis=-1, out=paths[..., 1:])
    return paths


def bm_batch(grid: TimeGrid, root: int, streams: Sequence[int],
             lane: int = LANE_W) -> np.ndarray:
    return _cumulate(gaussian_increments(grid, root, streams, lane))


def bm_drift_batch(grid: TimeGrid, root: int, streams: Sequence[int], alpha: float,
                   lane: int = LANE_W) -> np.ndarray:
    paths = bm_batch(grid, root, streams, lane)
    if alpha != 0:
        paths += alpha * grid.times
    return paths


def bridge_draws(n_steps: int, root: int, streams: Sequence[int],
                 lane: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-step ``(u_hit, z, u_loc)`` draws for :func:`functionals.bridge_zero_events`."""
    m = len(streams)
    u_hit = np.empty((m, n_steps))
    z = np.empty((m, n_steps))
    u_loc = np.empty((m, n_steps))
    for k, s in enumerate(streams):
        gen = generator(Seed(root, s), lane)
        u_hit[k] = gen.random(n_steps)
        z[k] = gen.standard_normal(n_steps)
        u_loc[k] = gen.random(n_steps)
    return u_hit, z, u_loc


def zeros_of(values: np.ndarray, grid: TimeGrid, root: int, streams: Sequence[int],
             lane: int | None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(events, times, left)`` of a batch; bridge-refined unless ``lane is None``."""
    values = np.atleast_2d(values)
    if lane is None:
        times, left = functionals.zero_event_times(values, grid.dt)
        return functionals.zero_events(values), times, left
    draws = bridge_draws(grid.n_steps, root, streams, lane)
    return functionals.bridge_zero_events(values, grid.dt, *draws)


def excursion_signs(root: int, stream: int, n: int, alpha: float,
                    lane: int = LANE_SIGNS) -> np.ndarray:
    """``n`` independent signs, +1 with probability ``(1 + alpha) / 2``."""
    u = generator(Seed(root, stream), lane).random(n)
    return np.where(u < 0.5 * (1.0 + alpha), 1.0, -1.0)


def flip_excursions(driver: np.ndarray, events: np.ndarray, alpha: float, root: int,
                    streams: Sequence[int], lane: int = LANE_SIGNS) -> np.ndarray:
    """Give every excursion of ``|driver|`` an independent skewed sign.

    ``events`` marks the grid steps containing a zero of the driver; each one
    opens a new excursion.
    """
    driver = np.atleast_2d(driver)
    exc_id = np.cumsum(events, axis=-1)
    out = np.abs(driver)
    for k, s in enumerate(streams):
        signs = excursion_signs(root, s, int(exc_id[k, -1]) + 1, alpha, lane)
        out[k] *= signs[exc_id[k]]
    return out


def skew_from_driver(driver: np.ndarray, grid: TimeGrid, alpha: float, root: int,
                     streams: Sequence[int], bridge_lane: int | None = LANE_BRIDGE_BETA,
                     sign_lane: int = LANE_SIGNS):
    """Skew BM built on a given driving BM batch, plus the zeros used.

    Returns ``(X, events, times, left)``.
    """
    _check_alpha_skew(alpha)
    events, times, left = zeros_of(driver, grid, root, streams, bridge_lane)
    return flip_excursions(driver, events, alpha, root, streams, sign_lane), events, times, left


def skew_bm_batch(grid: TimeGrid, root: int, streams: Sequence[int], alpha: float,
                  lane: int = LANE_W, sign_lane: int = LANE_SIGNS,
                  bridge_lane: int | None = LANE_BRIDGE_W) -> np.ndarray:
    _check_alpha_skew(alpha)
    beta = bm_batch(grid, root, streams, lane)
    return skew_from_driver(beta, grid, alpha, root, streams, bridge_lane, sign_lane)[0]


def skew_bm_euler_batch(grid: TimeGrid, root: int, streams: Sequence[int],
                        alpha: float, epsilon: float | None = None,
                        lane: int = LANE_W) -> np.ndarray:
    """Explicit scheme ``X += dB + k dL`` with the occupation estimator of L.

    ``dL = dt / (2 eps) 1{|X| < eps}``.  A drift of ``k / (2 eps)`` on the
    band ``|x| < eps`` makes the scale density jump by ``exp(2k)`` across
    it, so the scheme converges to skew BM with parameter ``tanh(k)``; the
    coefficient is therefore ``k = atanh(alpha)``.  ``|alpha| = 1`` (reflected
    BM) uses ``X_{i+1} = alpha |alpha X_i + dB_i|``.
    """
    _check_alpha_skew(alpha)
    dt = grid.dt
    eps = np.sqrt(dt) if epsilon is None else float(epsilon)
    dB = gaussian_increments(grid, root, streams, lane)
    if alpha == 0:
        return _cumulate(dB)
    x = np.zeros((len(streams), grid.n_steps + 1))
    cur = x[:, 0].copy()
    if abs(alpha) == 1:
        for i in range(grid.n_steps):
            cur = alpha * np.abs(alpha * cur + dB[:, i])
            x[:, i + 1] = cur
        return x
    push = np.arctanh(alpha) * dt / (2.0 * eps)
    for i in range(grid.n_steps):
        cur = cur + dB[:, i] + push * (np.abs(cur) < eps)
        x[:, i + 1] = cur
    return x


# ---------------------------------------------------------------------------
# single-path layer


def simulate_bm(grid: TimeGrid, seed: Seed, lane: int = LANE_W) -> SamplePath:
    """Standard Brownian motion started at 0."""
    return SamplePath(grid, bm_batch(grid, seed.root, [seed.stream], lane)[0])


def simulate_bm_drift(grid: TimeGrid, seed: Seed, alpha: float,
                      lane: int = LANE_W) -> SamplePath:
    """``B_t + alpha * t`` driven by the same increments as :func:`simulate_bm`."""
    return SamplePath(grid, bm_drift_batch(grid, seed.root, [seed.stream], alpha, lane)[0])


def simulate_skew_bm(grid: TimeGrid, seed: Seed, alpha: float,
                     lane: int = LANE_W, sign_lane: int = LANE_SIGNS,
                     bridge_lane: int | None = LANE_BRIDGE_W) -> SamplePath:
    """Skew Brownian motion by independent sign flips of reflected BM excursions.

    Each excursion of ``|B|`` is made positive with probability
    ``(1 + alpha) / 2``.  Excursion boundaries include the zeros hidden
    between grid points (sampled from the Brownian bridge), which makes the
    grid values exact in law; pass ``bridge_lane=None`` to split only at
    sign changes and grid zeroes.  Raises ``ValueError`` if ``|alpha| > 1``.
    """
    return SamplePath(grid, skew_bm_batch(grid, seed.root, [seed.stream], alpha, lane,
                                          sign_lane, bridge_lane)[0])


def simulate_skew_bm_euler(grid: TimeGrid, seed: Seed, alpha: float,
                           epsilon: float | None = None,
                           lane: int = LANE_W) -> SamplePath:
    """Euler cross-check for skew BM; reduces to the driving BM when ``alpha == 0``."""
    return SamplePath(
        grid, skew_bm_euler_batch(grid, seed.root, [seed.stream], alpha, epsilon, lane)[0])


def terminal_values(batch_fn, grid: TimeGrid, root: int, n_paths: int,
                    chunk: int = 2000, start: int = 0, **kwargs) -> np.ndarray:
    """Terminal values of ``batch_fn(grid, root, streams, **kwargs)`` over many streams."""
    out = []
    for lo in range(start, start + n_paths, chunk):
        streams = range(lo, min(lo + chunk, start + n_paths))
        out.append(batch_fn(grid, root, streams, **kwargs)[:, -1].copy())
    return np.concatenate(out)


def iter_streams(n_paths: int, chunk: int, start: int = 0) -> Iterable[range]:
    for lo in range(start, start + n_paths, chunk):
        yield range(lo, min(lo + chunk, start + n_paths))
