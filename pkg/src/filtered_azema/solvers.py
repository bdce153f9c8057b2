"""
Constructions of the observation processes.

Four scenario kinds share one layout (:class:`ScenarioBatch`):

``FIRST_EULER``
    explicit scheme for ``Y = B + alpha * int sgn(W_{g_s(Y)}) ds``, last zero
    tracked online on ``Y`` itself;
``FIRST_EXACT``
    ``Y = sgn(W_{g(B^alpha)}) B^alpha`` with ``B^alpha_t = B_t + alpha t``;
``DRIFTLESS_Z``
    ``Z = sgn(W_{g(B)}) B`` (stored in the ``Y`` slot);
``SECOND``
    ``X`` skew BM independent of ``W`` and ``Y = sgn(W_{g(X)}) X``.

For the signed constructions the zero set of the observation is taken from the
unsigned driver (``B^alpha``, ``B`` or ``|X|``): in continuous time the two
coincide, while on a grid a sign flip of the driver can hide a zero of ``Y``
between grid points.  ``W`` at a zero is read at the left grid index of the
crossing (see :func:`functionals.read_at_left`).
"""
from __future__ import annotations

import csv
import enum
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import functionals as fn
from .paths import (LANE_B, LANE_BETA, LANE_BRIDGE_B, LANE_BRIDGE_BETA, LANE_SIGNS, LANE_W, Seed,
                    TimeGrid, _check_alpha_skew, bm_batch, bridge_draws, skew_from_driver,
                    zeros_of)

THREADS_ENV = "AZEMA_THREADS"


class ScenarioKind(str, enum.Enum):
    FIRST_EULER = "first-euler"
    FIRST_EXACT = "first-exact"
    SECOND = "second"
    DRIFTLESS_Z = "z"

    @property
    def is_first(self) -> bool:
        return self in (ScenarioKind.FIRST_EULER, ScenarioKind.FIRST_EXACT)


@dataclass
class ScenarioBatch:
    """Coupled paths for a block of streams; every array is ``(n_paths, n + 1)``.

    ``g`` is the running last zero of the observation, ``zero_event`` flags the
    grid steps containing a zero (``zero_time`` holds the last zero inside the
    step, NaN elsewhere), ``sign_state`` is ``sgn(W_{g_{t_i}(Y)})``.
    """

    kind: ScenarioKind
    alpha: float
    grid: TimeGrid
    root: int
    streams: np.ndarray
    W: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    sign_state: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    zero_event: np.ndarray = field(repr=False)
    zero_time: np.ndarray = field(repr=False)
    X: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.streams)

    def __getitem__(self, k: int) -> "CoupledScenario":
        return CoupledScenario(
            self.kind, self.alpha, self.grid, Seed(self.root, int(self.streams[k])),
            self.W[k], self.B[k], self.Y[k], self.sign_state[k], self.g[k],
            self.zero_event[k], None if self.X is None else self.X[k])

    def zero_times(self, k: int) -> np.ndarray:
        """Zero set of the observation on path ``k``."""
        return self.zero_time[k][self.zero_event[k]]


@dataclass
class CoupledScenario:
    """One path of a :class:`ScenarioBatch`."""

    kind: ScenarioKind
    alpha: float
    grid: TimeGrid
    seed: Seed
    W: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    sign_state: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)
    zero_event: np.ndarray = field(repr=False)
    X: np.ndarray | None = field(default=None, repr=False)

    def to_csv(self) -> str:
        cols = ["t", "W", "B", "Y"] + (["X"] if self.X is not None else []) + ["sign_state"]
        data = [self.grid.times, self.W, self.B, self.Y]
        if self.X is not None:
            data.append(self.X)
        data.append(self.sign_state)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in zip(*data):
            w.writerow([repr(float(x)) for x in row[:-1]] + [int(row[-1])])
        return buf.getvalue()


def _signs_at(W: np.ndarray, left: np.ndarray) -> np.ndarray:
    return fn.sgn(fn.read_at_left(W, left))


def _lane(bridge: bool, lane: int) -> int | None:
    return lane if bridge else None


def _signed(kind, alpha, grid, root, streams, W, B, driver, bridge, X=None):
    """``sgn(W at last zero of driver) * (X or driver)`` and its bookkeeping."""
    events, times, left = zeros_of(driver, grid, root, streams, _lane(bridge, LANE_BRIDGE_B))
    g, gl = fn.last_zero_from_events(events, times, left)
    s = _signs_at(W, gl)
    obs = driver if X is None else X
    return ScenarioBatch(kind, alpha, grid, root, np.asarray(streams), W, B, s * obs, s, g,
                         events, times, X)


def first_kind_exact_batch(grid, root, streams, alpha, bridge=True) -> ScenarioBatch:
    W = bm_batch(grid, root, streams, LANE_W)
    B = bm_batch(grid, root, streams, LANE_B)
    drifted = B + alpha * grid.times if alpha != 0 else B
    return _signed(ScenarioKind.FIRST_EXACT, alpha, grid, root, streams, W, B, drifted, bridge)


def driftless_z_batch(grid, root, streams, alpha=0.0, bridge=True) -> ScenarioBatch:
    W = bm_batch(grid, root, streams, LANE_W)
    B = bm_batch(grid, root, streams, LANE_B)
    return _signed(ScenarioKind.DRIFTLESS_Z, 0.0, grid, root, streams, W, B, B, bridge)


def second_kind_batch(grid, root, streams, alpha, bridge=True) -> ScenarioBatch:
    _check_alpha_skew(alpha)
    W = bm_batch(grid, root, streams, LANE_W)
    beta = bm_batch(grid, root, streams, LANE_BETA)
    # the zero set of X is the zero set of |beta|: build X on the same events
    X, events, times, left = skew_from_driver(beta, grid, alpha, root, streams,
                                              _lane(bridge, LANE_BRIDGE_BETA), LANE_SIGNS)
    g, gl = fn.last_zero_from_events(events, times, left)
    s = _signs_at(W, gl)
    return ScenarioBatch(ScenarioKind.SECOND, alpha, grid, root, np.asarray(streams),
                         W, beta, s * X, s, g, events, times, X)


def first_kind_euler_batch(grid, root, streams, alpha, bridge=True) -> ScenarioBatch:
    W = bm_batch(grid, root, streams, LANE_W)
    B = bm_batch(grid, root, streams, LANE_B)
    dB = np.diff(B, axis=1)
    dt = grid.dt
    m, n = B.shape[0], grid.n_steps
    if bridge:
        u_hit, z, u_loc = bridge_draws(n, root, streams, LANE_BRIDGE_B)
    Y = np.zeros((m, n + 1))
    S = np.empty((m, n + 1))
    G = np.zeros((m, n + 1))
    ev = np.zeros((m, n + 1), dtype=bool)
    ev[:, 0] = True
    T = np.full((m, n + 1), np.nan)
    T[:, 0] = 0.0
    rows = np.arange(m)
    s = _signs_at(W, np.zeros((m, 1), dtype=np.int64))[:, 0]
    g = np.zeros(m)
    y = np.zeros(m)
    S[:, 0] = s
    for i in range(n):
        y_new = y + dB[:, i] + (alpha * dt) * s
        pair = np.stack([y, y_new], axis=1)
        if bridge:
            e, tz, lz = fn.bridge_zero_events(pair, dt, u_hit[:, i:i + 1], z[:, i:i + 1],
                                              u_loc[:, i:i + 1])
        else:
            tz, lz = fn.zero_event_times(pair, dt)
            e = fn.zero_events(pair)
        hit = e[:, 1]
        if hit.any():
            left = lz[:, 1] + i
            g = np.where(hit, tz[:, 1] + i * dt, g)
            w = W[rows, np.maximum(left, 0)]
            w = np.where(w == 0, W[rows, np.minimum(left + 1, n)], w)
            s = np.where(hit, np.where(w > 0, 1.0, -1.0), s)
            ev[:, i + 1] = hit
            T[:, i + 1] = np.where(hit, tz[:, 1] + i * dt, np.nan)
        y = y_new
        Y[:, i + 1] = y
        S[:, i + 1] = s
        G[:, i + 1] = g
    return ScenarioBatch(ScenarioKind.FIRST_EULER, alpha, grid, root, np.asarray(streams),
                         W, B, Y, S, G, ev, T)


_BUILDERS = {
    ScenarioKind.FIRST_EULER: first_kind_euler_batch,
    ScenarioKind.FIRST_EXACT: first_kind_exact_batch,
    ScenarioKind.DRIFTLESS_Z: driftless_z_batch,
    ScenarioKind.SECOND: second_kind_batch,
}


def scenario_batch(kind, grid: TimeGrid, root: int, streams: Sequence[int],
                   alpha: float = 0.0, bridge: bool = True) -> ScenarioBatch:
    """Build scenarios for ``streams``.

    ``bridge=True`` (default) includes zeros hidden between grid points and
    samples each last-zero time exactly from the Brownian bridge;
    ``bridge=False`` uses sign changes and linear interpolation only.
    """
    kind = ScenarioKind(kind)
    return _BUILDERS[kind](grid, root, list(streams), alpha, bridge)


def solve_first_kind_euler(grid: TimeGrid, seed: Seed, alpha: float,
                           bridge: bool = True) -> CoupledScenario:
    return first_kind_euler_batch(grid, seed.root, [seed.stream], alpha, bridge)[0]


def solve_first_kind_exact(grid: TimeGrid, seed: Seed, alpha: float,
                           bridge: bool = True) -> CoupledScenario:
    return first_kind_exact_batch(grid, seed.root, [seed.stream], alpha, bridge)[0]


def solve_driftless_z(grid: TimeGrid, seed: Seed, bridge: bool = True) -> CoupledScenario:
    return driftless_z_batch(grid, seed.root, [seed.stream], 0.0, bridge)[0]


def solve_second_kind(grid: TimeGrid, seed: Seed, alpha: float,
                      bridge: bool = True) -> CoupledScenario:
    """Raises ``ValueError`` for ``|alpha| > 1``."""
    return second_kind_batch(grid, seed.root, [seed.stream], alpha, bridge)[0]


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class ScenarioStream:
    """Iterable of :class:`ScenarioBatch` blocks covering streams ``start .. start + n_paths``.

    Blocks are built in parallel when ``threads > 1`` but always yielded in
    stream order, so downstream reductions do not depend on the thread count.
    """

    kind: ScenarioKind
    grid: TimeGrid
    alpha: float
    root: int
    n_paths: int
    start: int = 0
    chunk: int | None = None
    threads: int | None = None
    bridge: bool = True

    def __post_init__(self):
        self.kind = ScenarioKind(self.kind)
        if self.kind is ScenarioKind.SECOND:
            _check_alpha_skew(self.alpha)
        if self.chunk is None:
            self.chunk = max(1, min(self.n_paths, 2_000_000 // (self.grid.n_steps + 1)))

    def blocks(self) -> list[range]:
        lo, hi = self.start, self.start + self.n_paths
        return [range(a, min(a + self.chunk, hi)) for a in range(lo, hi, self.chunk)]

    def __iter__(self) -> Iterator[ScenarioBatch]:
        threads = self.threads or default_threads()
        build = lambda r: scenario_batch(self.kind, self.grid, self.root, r, self.alpha,
                                         self.bridge)
        if threads == 1:
            for r in self.blocks():
                yield build(r)
            return
        with ThreadPoolExecutor(threads) as ex:
            # bounded look-ahead keeps memory at ~threads blocks
            blocks = self.blocks()
            for lo in range(0, len(blocks), threads):
                yield from ex.map(build, blocks[lo:lo + threads])

    def map(self, fn_, *args, **kwargs) -> list:
        """Apply ``fn_(batch, ...)`` to every block, results in stream order."""
        return [fn_(b, *args, **kwargs) for b in self]

    @property
    def provenance(self) -> dict:
        return {"kind": self.kind.value, "alpha": self.alpha, "t_max": self.grid.t_max,
                "dt": self.grid.dt, "n_paths": self.n_paths, "root": self.root,
                "start_stream": self.start, "bridge": self.bridge}
