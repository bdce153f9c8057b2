"""
Brute-force Monte Carlo verification.

Every check consumes scenario blocks (:class:`solvers.ScenarioBatch`, usually
from a :class:`solvers.ScenarioStream`), reduces per-path statistics in
stream order with compensated summation, and returns immutable
:class:`McReport` records.  Thresholds are frozen module constants:

* z-score checks pass iff ``|z| < Z_MAX`` (4, two-sided);
* distribution and independence checks pass iff ``p > P_MIN`` (0.01), with a
  Bonferroni split inside a battery.

A projection ``m_t = E[W_t | F^Y_t]`` is characterised by
``E[(W_t - m_t) phi] = 0`` for every ``F^Y_t``-measurable ``phi``; the
orthogonality battery tests that identity over a :class:`TestFunctionalFamily`
of observable functionals.
"""
from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from . import filters as flt
from . import functionals as fn
from .paths import LANE_BRIDGE_W, Seed, TimeGrid, bm_batch, iter_streams, zeros_of
from .solvers import ScenarioBatch, ScenarioKind

Z_MAX = 4.0
P_MIN = 0.01
MIN_SAMPLES = 1000


# ---------------------------------------------------------------------------
# reports and reductions


@dataclass(frozen=True)
class McReport:
    """Outcome of one Monte Carlo check.

    ``passed`` serialises as ``"pass"``; ``ci95`` is always
    ``estimate -+ 1.96 stderr``.
    """

    name: str
    n_paths: int
    dt: float
    estimate: float
    stderr: float
    statistic: float
    p_value: float | None
    passed: bool
    seed: Seed
    params: Mapping = field(default_factory=dict)

    @property
    def ci95(self) -> tuple[float, float]:
        return (self.estimate - 1.96 * self.stderr, self.estimate + 1.96 * self.stderr)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_paths": int(self.n_paths),
            "dt": _jsonable(self.dt),
            "estimate": _jsonable(self.estimate),
            "stderr": _jsonable(self.stderr),
            "ci95": [_jsonable(x) for x in self.ci95],
            "statistic": _jsonable(self.statistic),
            "p_value": _jsonable(self.p_value),
            "pass": bool(self.passed),
            "seed": {"root": int(self.seed.root), "stream": int(self.seed.stream)},
            "params": {k: _jsonable(v) for k, v in self.params.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    def line(self) -> str:
        p = "" if self.p_value is None else f" p={self.p_value:.3g}"
        return (f"{'PASS' if self.passed else 'FAIL'} {self.name}: estimate={self.estimate:.6g} "
                f"stderr={self.stderr:.3g} stat={self.statistic:.4g}{p}")


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, Seed):
        return {"root": v.root, "stream": v.stream}
    if isinstance(v, Mapping):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    return v


def reports_to_json(reports: Sequence[McReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=1)


def summary_line(reports: Sequence[McReport]) -> str:
    return f"PASS {sum(r.passed for r in reports)}/{len(reports)}"


def fsum_mean(x) -> tuple[float, float]:
    """Mean and standard error with compensated summation in array order."""
    x = np.asarray(x, dtype=np.float64).ravel()
    n = x.size
    if n == 0:
        return math.nan, math.nan
    m = math.fsum(x) / n
    if n < 2:
        return m, math.nan
    d = x - m
    var = math.fsum(d * d) / (n - 1)
    return m, math.sqrt(var / n)


def _z(est: float, se: float) -> float:
    if se > 0:
        return est / se
    return 0.0 if est == 0 else math.copysign(math.inf, est)


def _p_two_sided(z: float) -> float:
    return float(2 * stats.norm.sf(abs(z)))


def _ratio_of_means(num, den) -> tuple[float, float]:
    """``sum num / sum den`` with a delta-method standard error (paths iid)."""
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    n = num.size
    sd = math.fsum(den)
    if sd == 0:
        return math.nan, math.nan
    r = math.fsum(num) / sd
    res = num - r * den
    se = math.sqrt(math.fsum(res * res) / max(n - 1, 1) * n) / sd
    return r, se


def _as_batches(scenarios) -> list:
    if isinstance(scenarios, ScenarioBatch):
        return [scenarios]
    return scenarios


class _Checker:
    """Checks that every block of a stream has the same kind, grid and alpha."""

    def __init__(self):
        self.ref = None
        self.n = 0
        self.first_stream = None

    def __call__(self, b) -> None:
        key = (getattr(b, "kind", None), b.grid, getattr(b, "alpha", None), b.root)
        if self.ref is None:
            self.ref = key
            self.first_stream = int(b.streams[0])
        elif key != self.ref:
            raise ValueError(f"mixed scenarios in one test: {key[:3]} vs {self.ref[:3]}")
        self.n += len(b.streams)

    @property
    def kind(self):
        return self.ref[0]

    @property
    def grid(self) -> TimeGrid:
        return self.ref[1]

    @property
    def alpha(self):
        return self.ref[2]

    @property
    def seed(self) -> Seed:
        return Seed(self.ref[3], self.first_stream)


def _warn_small(n: int, name: str, params: dict) -> None:
    if n < MIN_SAMPLES:
        params["insufficient_n"] = True
        warnings.warn(f"{name}: only {n} samples (< {MIN_SAMPLES}); result is not meaningful",
                      stacklevel=3)


# ---------------------------------------------------------------------------
# observable functionals


def _tail_index(batch, t: float) -> int:
    return batch.grid.index(t)


def _running_max_abs(Y: np.ndarray, i: int) -> np.ndarray:
    return np.abs(Y[:, :i + 1]).max(axis=1)


def _local_time_at(Y: np.ndarray, dt: float, i: int) -> np.ndarray:
    """Symmetric occupation estimate of the local time at 0 on ``[0, t_i]``."""
    eps = math.sqrt(dt)
    return (dt / (2 * eps)) * np.count_nonzero(np.abs(Y[:, :i]) < eps, axis=1)


def _previous_sign(batch, i: int) -> np.ndarray:
    """Sign state in force just before the last zero at or before ``t_i``."""
    ev = batch.zero_event[:, :i + 1]
    last = ev.shape[1] - 1 - np.argmax(ev[:, ::-1], axis=1)
    prev = np.maximum(last - 1, 0)
    return batch.sign_state[np.arange(ev.shape[0]), prev]


def _bins(edges):
    def make(lo, hi):
        return lambda b, i: ((b.Y[:, i] / math.sqrt(b.grid.times[i] or 1.0) >= lo)
                             & (b.Y[:, i] / math.sqrt(b.grid.times[i] or 1.0) < hi)).astype(float)
    return {f"bin[{lo:g},{hi:g})": make(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])}


_Y_EDGES = (-math.inf, -1.0, -0.25, 0.25, 1.0, math.inf)

# name -> phi(batch, i); only Y, g, the grid and (second kind) the sign state
# are read, so every phi is a functional of the observation path
FUNCTIONALS: dict[str, Callable] = {
    "one": lambda b, i: np.ones(len(b.streams)),
    "y": lambda b, i: b.Y[:, i],
    "y^2": lambda b, i: b.Y[:, i] ** 2,
    "y^3": lambda b, i: b.Y[:, i] ** 3,
    "g": lambda b, i: b.g[:, i],
    "g^2": lambda b, i: b.g[:, i] ** 2,
    "g*y": lambda b, i: b.g[:, i] * b.Y[:, i],
    "tanh(alpha*y)": lambda b, i: np.tanh(b.alpha * b.Y[:, i]),
    "sqrt(g)*tanh(alpha*y)": lambda b, i: np.sqrt(b.g[:, i]) * np.tanh(b.alpha * b.Y[:, i]),
    "sgn(y)": lambda b, i: np.sign(b.Y[:, i]),
    **_bins(_Y_EDGES),
    "max|y|": lambda b, i: _running_max_abs(b.Y, i),
    "local_time": lambda b, i: _local_time_at(b.Y, b.grid.dt, i),
    "y(t/4)": lambda b, i: b.Y[:, i // 4],
    "y(t/2)": lambda b, i: b.Y[:, i // 2],
    "sgn(y(t/2))*y": lambda b, i: np.sign(b.Y[:, i // 2]) * b.Y[:, i],
    # second kind: the sign state is a functional of Y there
    "s": lambda b, i: b.sign_state[:, i],
    "s*sqrt(g)": lambda b, i: b.sign_state[:, i] * np.sqrt(b.g[:, i]),
    "s*g": lambda b, i: b.sign_state[:, i] * b.g[:, i],
    "s*|y|": lambda b, i: b.sign_state[:, i] * np.abs(b.Y[:, i]),
    "s(t/4)": lambda b, i: b.sign_state[:, i // 4],
    "s(t/2)": lambda b, i: b.sign_state[:, i // 2],
    "s*s(t/2)": lambda b, i: b.sign_state[:, i] * b.sign_state[:, i // 2],
    "s*s(t/4)": lambda b, i: b.sign_state[:, i] * b.sign_state[:, i // 4],
    "s_prev": _previous_sign,
    "s*s_prev": lambda b, i: b.sign_state[:, i] * _previous_sign(b, i),
    "s_prev*sqrt(g)": lambda b, i: _previous_sign(b, i) * np.sqrt(b.g[:, i]),
}

_COMMON = ("one", "y", "y^2", "y^3", "g", "g^2", "g*y", "sgn(y)", *_bins(_Y_EDGES),
           "max|y|", "local_time", "y(t/4)", "y(t/2)", "sgn(y(t/2))*y")
_FIRST = _COMMON + ("tanh(alpha*y)", "sqrt(g)*tanh(alpha*y)")
_SECOND = _COMMON + ("s", "s*sqrt(g)", "s*g", "s*|y|", "s(t/4)", "s(t/2)", "s*s(t/2)",
                     "s*s(t/4)", "s_prev", "s*s_prev", "s_prev*sqrt(g)")
_SIGN_READERS = frozenset(n for n in FUNCTIONALS if n.startswith("s") and n != "sgn(y)"
                          and not n.startswith("sgn(y(") and not n.startswith("sqrt"))


@dataclass(frozen=True)
class TestFunctionalFamily:
    """Named observable functionals ``phi_j`` used in orthogonality batteries.

    The default families cover polynomials of ``Y_t`` up to degree 3,
    polynomials of ``g_t``, bins of ``Y_t / sqrt(t)``, the running maximum of
    ``|Y|``, the local time estimate, ``Y`` at ``t/4`` and ``t/2``, and for
    the second kind products of current and earlier sign states.
    """

    __test__ = False  # not a pytest class

    names: tuple[str, ...]

    def __post_init__(self):
        unknown = [n for n in self.names if n not in FUNCTIONALS]
        if unknown:
            raise ValueError(f"unknown functionals {unknown}; known: {sorted(FUNCTIONALS)}")

    @classmethod
    def default(cls, kind) -> "TestFunctionalFamily":
        kind = ScenarioKind(kind)
        return cls(_SECOND if kind is ScenarioKind.SECOND else _FIRST)

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "TestFunctionalFamily":
        return cls(tuple(names))

    def check_kind(self, kind) -> None:
        if ScenarioKind(kind) is not ScenarioKind.SECOND:
            bad = [n for n in self.names if n in _SIGN_READERS]
            if bad:
                raise ValueError(f"{bad} read the sign state, which is not observable "
                                 f"for {ScenarioKind(kind).value}")

    def evaluate(self, batch, i: int) -> np.ndarray:
        """``(n_paths, len(names))`` values at grid index ``i``."""
        return np.stack([np.asarray(FUNCTIONALS[n](batch, i), dtype=np.float64)
                         for n in self.names], axis=1)


# ---------------------------------------------------------------------------
# projection tests


class FilterName(str, enum.Enum):
    FIRST_KIND = "first-kind"
    FIRST_KIND_CORRUPTED = "first-kind-corrupted"
    SECOND_KIND = "second-kind"
    ZERO = "zero"


def filter_values(batch, i: int, which, c: flt.MeanderConstant = flt.DEFAULT_CONSTANT):
    """Candidate projection of ``W_{t_i}`` for every path of ``batch``."""
    if callable(which):
        return np.asarray(which(batch, i), dtype=np.float64)
    which = FilterName(which)
    if which is FilterName.ZERO:
        return np.zeros(len(batch.streams))
    if which in (FilterName.FIRST_KIND, FilterName.FIRST_KIND_CORRUPTED):
        if not ScenarioKind(batch.kind).is_first:
            raise ValueError("first-kind filter on a non-first-kind scenario")
        v = flt.first_kind_value(batch.g[:, i], batch.Y[:, i], batch.alpha)
        return 2 * v if which is FilterName.FIRST_KIND_CORRUPTED else v
    if ScenarioKind(batch.kind) is not ScenarioKind.SECOND:
        raise ValueError("second-kind filter on a non-second-kind scenario")
    return batch.sign_state[:, i] * c.c_nu * np.sqrt(batch.g[:, i])


class Check:
    """Streaming form of a check: ``update`` per block, then ``result``.

    Several checks can share one pass over an expensive stream via
    :func:`run_checks`.
    """

    def __init__(self):
        self.chk = _Checker()

    def update(self, batch) -> None:
        self.chk(batch)
        self._update(batch)

    def _update(self, batch) -> None:
        raise NotImplementedError

    def result(self):
        raise NotImplementedError


def run_checks(scenarios, *checks: Check) -> list:
    """Feed every block of ``scenarios`` to each check once; return their results."""
    for b in _as_batches(scenarios):
        for c in checks:
            c.update(b)
    return [c.result() for c in checks]


class ProjectionCheck(Check):
    """See :func:`test_projection`."""

    def __init__(self, filter, t: float, family: TestFunctionalFamily | None = None,
                 c: flt.MeanderConstant = flt.DEFAULT_CONSTANT):
        super().__init__()
        self.filter, self.t, self.fam, self.c = filter, t, family, c
        self.parts = []

    def _update(self, b) -> None:
        if self.fam is None:
            self.fam = TestFunctionalFamily.default(b.kind)
        self.fam.check_kind(b.kind)
        i = _tail_index(b, self.t)
        resid = b.W[:, i] - filter_values(b, i, self.filter, self.c)
        self.parts.append(resid[:, None] * self.fam.evaluate(b, i))

    def result(self) -> list[McReport]:
        chk, c = self.chk, self.c
        prod = np.concatenate(self.parts)
        f = self.filter
        name_f = f.value if isinstance(f, enum.Enum) else str(getattr(f, "__name__", f))
        params = {"kind": chk.kind, "alpha": chk.alpha, "t": self.t, "filter": name_f,
                  "c_A": c.c_A, "constant_mode": c.mode}
        _warn_small(chk.n, "projection", params)
        out = []
        for j, name in enumerate(self.fam.names):
            m, se = fsum_mean(prod[:, j])
            z = _z(m, se)
            out.append(McReport(f"projection[{name_f}]:{name}", chk.n, chk.grid.dt, m, se, z,
                                _p_two_sided(z), abs(z) < Z_MAX, chk.seed,
                                dict(params, phi=name)))
        return out


def test_projection(scenarios, filter, t: float,
                    family: TestFunctionalFamily | None = None,
                    c: flt.MeanderConstant = flt.DEFAULT_CONSTANT) -> list[McReport]:
    """Orthogonality of ``W_t - m_t`` to each observable functional.

    One report per ``phi_j``: the z-score of the sample mean of
    ``(W_t - m_t) phi_j``; passes iff ``|z| < 4``.  ``filter`` is a
    :class:`FilterName` or a callable ``(batch, i) -> values``.
    """
    return run_checks(scenarios, ProjectionCheck(filter, t, family, c))[0]


def max_abs_z(reports: Sequence[McReport]) -> float:
    return max(abs(r.statistic) for r in reports)


# ---------------------------------------------------------------------------
# meander constant


@dataclass
class WienerBatch:
    """Plain Brownian paths with the bridge-refined last zero ``gamma``."""

    grid: TimeGrid
    root: int
    streams: np.ndarray
    W: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)


def wiener_stream(grid: TimeGrid, root: int, n_paths: int, start: int = 0,
                  chunk: int | None = None) -> Iterable[WienerBatch]:
    chunk = chunk or max(1, min(n_paths, 2_000_000 // (grid.n_steps + 1)))
    for r in iter_streams(n_paths, chunk, start):
        W = bm_batch(grid, root, r)
        ev, tz, left = zeros_of(W, grid, root, r, LANE_BRIDGE_W)
        gamma, _ = fn.last_zero_from_events(ev, tz, left)
        yield WienerBatch(grid, root, np.asarray(r), W, gamma)


def _gamma_of(b, i: int) -> np.ndarray:
    g = getattr(b, "gamma", None)
    if g is not None:
        return g[:, i]
    ev, tz, left = zeros_of(b.W, b.grid, b.root, b.streams, LANE_BRIDGE_W)
    return fn.last_zero_from_events(ev, tz, left)[0][:, i]


CANDIDATES = {"pi/2": math.pi / 2, "sqrt(pi/2)": math.sqrt(math.pi / 2)}


def calibrate_meander_constant(scenarios, t: float, exclude_quantile: float = 0.0,
                               n_se: float = 3.0) -> McReport:
    """Slope of ``|W_t|`` on ``sqrt(t - gamma_t)`` through the origin.

    Passes iff exactly one candidate (``pi/2``, ``sqrt(pi/2)``) lies within
    ``n_se`` standard errors; ``params["selected"]`` names it.  With
    ``exclude_quantile > 0`` the paths with the smallest ``t - gamma_t`` are
    dropped first.
    """
    chk = _Checker()
    xs, us = [], []
    for b in _as_batches(scenarios):
        chk(b)
        i = _tail_index(b, t)
        xs.append(np.abs(b.W[:, i]))
        us.append(t - _gamma_of(b, i))
    return calibrate_from_samples(np.concatenate(xs), np.concatenate(us), t, chk.grid.dt,
                                  chk.seed, exclude_quantile, n_se)


def calibrate_from_samples(abs_w: np.ndarray, u: np.ndarray, t: float, dt: float, seed: Seed,
                           exclude_quantile: float = 0.0, n_se: float = 3.0) -> McReport:
    """:func:`calibrate_meander_constant` from ``|W_t|`` and ``t - gamma_t`` samples."""
    x = np.asarray(abs_w, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    n = x.size
    if exclude_quantile > 0:
        keep = u > np.quantile(u, exclude_quantile)
        x, u = x[keep], u[keep]
    su = np.sqrt(u)
    slope, se = _ratio_of_means(x * su, u)
    zs = {k: (slope - v) / se for k, v in CANDIDATES.items()}
    within = [k for k, z in zs.items() if abs(z) < n_se]
    selected = within[0] if len(within) == 1 else None
    params = {"t": t, "exclude_quantile": exclude_quantile, "selected": selected,
              **{f"z_vs_{k}": z for k, z in zs.items()}, "n_used": int(x.size)}
    _warn_small(n, "calibration", params)
    stat = zs[selected] if selected else min(zs.values(), key=abs)
    return McReport("calibrate-meander-constant", n, dt, slope, se, stat, None,
                    selected is not None, seed, params)


def constant_from_report(report: McReport) -> flt.MeanderConstant:
    """The constant a calibration report selected."""
    sel = report.params.get("selected")
    if sel == "pi/2":
        return flt.MeanderConstant.paper_verbatim()
    if sel == "sqrt(pi/2)":
        return flt.MeanderConstant.oracle_derived()
    raise ValueError("calibration did not select a unique constant")


def meander_cross_check(scenarios, t: float, slope: float, slope_se: float) -> McReport:
    """Second-kind check of a calibrated slope: ``E[s W_t] = slope (2/pi) E[sqrt(g_t)]``.

    ``s = sgn(W_{g_t})``; the prediction follows from the second-kind
    projection with ``c_nu = slope * 2 / pi``.  Passes within 3 combined
    standard errors.
    """
    chk = _Checker()
    sw, sg = [], []
    for b in _as_batches(scenarios):
        chk(b)
        i = _tail_index(b, t)
        sw.append(b.sign_state[:, i] * b.W[:, i])
        sg.append(np.sqrt(b.g[:, i]))
    sw, sg = np.concatenate(sw), np.concatenate(sg)
    m, se = fsum_mean(sw)
    pred = slope * (2 / math.pi) * math.fsum(sg) / sg.size
    _, se_g = fsum_mean(sg)
    se_pred = (2 / math.pi) * math.hypot(slope_se * math.fsum(sg) / sg.size, slope * se_g)
    tot = math.hypot(se, se_pred)
    z = (m - pred) / tot
    return McReport("meander-cross-check", chk.n, chk.grid.dt, m, se, z, _p_two_sided(z),
                    abs(z) < 3.0, chk.seed, {"t": t, "predicted": pred, "slope": slope})


# ---------------------------------------------------------------------------
# first kind: sign posterior, innovation, independence


def test_sign_posterior(scenarios, t: float, n_bins: int = 40,
                        min_count: int = 500) -> McReport:
    """Binned regression of ``sgn(W_{g_t})`` on ``Y_t`` against ``tanh(alpha Y_t)``.

    Within each bin the mean of ``sgn(W_{g_t}) - tanh(alpha Y_t)`` must be
    within 4 standard errors of 0, for every bin holding at least
    ``min_count`` paths, with the standard error taken from the null variance
    ``1 - tanh^2(alpha Y_t)``.  Comparing with the in-bin mean of ``tanh`` rather
    than its value at the bin midpoint removes the curvature bias of wide
    bins; the midpoint comparison is reported alongside.
    """
    if n_bins < 10:
        raise ValueError("need at least 10 bins")
    chk = _Checker()
    ys, ss = [], []
    for b in _as_batches(scenarios):
        chk(b)
        if not ScenarioKind(b.kind).is_first:
            raise ValueError("sign posterior applies to first-kind scenarios")
        i = _tail_index(b, t)
        ys.append(b.Y[:, i].copy())
        ss.append(b.sign_state[:, i].copy())
    y, s = np.concatenate(ys), np.concatenate(ss)
    alpha = chk.alpha
    half = 4 * math.sqrt(t) + abs(alpha) * t
    edges = np.linspace(-half, half, n_bins + 1)
    idx = np.clip(np.searchsorted(edges, y, side="right") - 1, 0, n_bins - 1)
    d = s - np.tanh(alpha * y)
    zs, mids, worst_mid, sparse = [], [], 0.0, 0
    for k in range(n_bins):
        sel = idx == k
        cnt = int(sel.sum())
        if cnt < min_count:
            sparse += 1
            continue
        # null variance Var(s | Y) = 1 - tanh^2: the sample variance collapses in
        # far bins where every sign agrees
        m = math.fsum(d[sel]) / cnt
        se = math.sqrt(math.fsum(1.0 - np.tanh(alpha * y[sel]) ** 2)) / cnt
        zs.append(_z(m, se))
        mid = 0.5 * (edges[k] + edges[k + 1])
        ms, ses = fsum_mean(s[sel])
        worst_mid = max(worst_mid, abs(ms - math.tanh(alpha * mid)) / ses if ses > 0 else 0.0)
        mids.append(mid)
    zmax = max(map(abs, zs)) if zs else math.nan
    params = {"t": t, "alpha": alpha, "n_bins": n_bins, "qualifying_bins": len(zs),
              "sparse_bins": sparse, "max_abs_z_midpoint": worst_mid}
    _warn_small(chk.n, "sign-posterior", params)
    return McReport("sign-posterior", chk.n, chk.grid.dt, zmax, 1.0, zmax,
                    _p_two_sided(zmax) if zs else None, bool(zs) and zmax < Z_MAX,
                    chk.seed, params)


def innovation_increments(Y: np.ndarray, alpha: float, dt: float,
                          compensator: str = "tanh") -> np.ndarray:
    """``B^Y`` on the grid: ``Y_i - alpha sum_{j<i} tanh(k alpha Y_j) dt``.

    ``compensator="tanh2"`` uses ``tanh(2 alpha Y)`` (a deliberately wrong
    compensator, for power checks).
    """
    k = {"tanh": 1.0, "tanh2": 2.0}[compensator]
    drift = alpha * dt * np.tanh(k * alpha * Y[:, :-1])
    out = Y.copy()
    out[:, 1:] -= np.cumsum(drift, axis=1)
    return out


_INNOVATION_PHIS = ("1", "y", "tanh(alpha*y)", "sgn(y)", "y^2", "max|y|")


class InnovationCheck(Check):
    """See :func:`test_innovation`."""

    def __init__(self, t: float, compensator: str = "tanh"):
        super().__init__()
        self.t, self.compensator = t, compensator
        self.qv, self.term, self.orth = [], [], []

    def _update(self, b) -> None:
        if not ScenarioKind(b.kind).is_first:
            raise ValueError("innovation applies to first-kind scenarios")
        t = self.t
        i = _tail_index(b, t)
        dt = b.grid.dt
        Y = b.Y[:, :i + 1]
        BY = innovation_increments(Y, b.alpha, dt, self.compensator)
        dBY = np.diff(BY, axis=1)
        corr = b.alpha ** 2 * dt * dt * np.sum(1 - np.tanh(b.alpha * Y[:, :-1]) ** 2, axis=1)
        self.qv.append(np.sum(dBY * dBY, axis=1) - t - corr)
        self.term.append(BY[:, -1] / math.sqrt(t))
        cols = []
        for lo, hi in ((i // 4, i // 2), (i // 2, i)):
            inc = BY[:, hi] - BY[:, lo]
            yl = Y[:, lo]
            phis = (np.ones_like(yl), yl, np.tanh(b.alpha * yl), np.sign(yl), yl * yl,
                    np.abs(Y[:, :lo + 1]).max(axis=1))
            cols.extend(inc * p for p in phis)
        self.orth.append(np.stack(cols, axis=1))

    def result(self) -> list[McReport]:
        chk = self.chk
        qv, term, orth = map(np.concatenate, (self.qv, self.term, self.orth))
        seed, n, dt = chk.seed, chk.n, chk.grid.dt
        base = {"t": self.t, "alpha": chk.alpha, "kind": chk.kind,
                "compensator": self.compensator}
        _warn_small(n, "innovation", base)
        m, se = fsum_mean(qv)
        z = _z(m, se)
        out = [McReport("innovation:quadratic-variation", n, dt, m, se, z, _p_two_sided(z),
                        abs(z) < Z_MAX, seed, dict(base))]
        ks = stats.kstest(term, stats.norm.cdf, method="asymp")
        mt, st = fsum_mean(term)
        out.append(McReport("innovation:normality", n, dt, mt, st, float(ks.statistic),
                            float(ks.pvalue), ks.pvalue > P_MIN, seed, dict(base)))
        labels = [f"[{a},{b_}]x{p}" for a, b_ in (("t/4", "t/2"), ("t/2", "t"))
                  for p in _INNOVATION_PHIS]
        for j, lab in enumerate(labels):
            m, se = fsum_mean(orth[:, j])
            z = _z(m, se)
            out.append(McReport(f"innovation:orthogonality:{lab}", n, dt, m, se, z,
                                _p_two_sided(z), abs(z) < Z_MAX, seed, dict(base, phi=lab)))
        return out


def test_innovation(scenarios, t: float, compensator: str = "tanh") -> list[McReport]:
    """Three checks that ``B^Y`` is a Brownian motion in the filtration of ``Y``.

    (a) quadratic variation: the mean of ``sum (dB^Y)^2 - t -
    alpha^2 dt^2 sum (1 - tanh^2(alpha Y_j))`` is 0 within 4 standard errors
    (the last term is the discretisation bias of the left-point compensator);
    (b) KS of ``B^Y_t / sqrt(t)`` against N(0, 1), ``p > 0.01``;
    (c) increments over ``[t/4, t/2]`` and ``[t/2, t]`` are orthogonal to
    functionals of ``Y`` at the left end, every ``|z| < 4``.
    """
    return run_checks(scenarios, InnovationCheck(t, compensator))[0]


def _quartile_codes(x: np.ndarray) -> np.ndarray:
    qs = np.unique(np.quantile(x, [0.25, 0.5, 0.75]))
    return np.searchsorted(qs, x, side="right")


def _chi2_independence(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    ca, cb = _quartile_codes(a), _quartile_codes(b)
    table = np.zeros((ca.max() + 1, cb.max() + 1))
    np.add.at(table, (ca, cb), 1)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if min(table.shape) < 2:
        return 0.0, 1.0
    res = stats.chi2_contingency(table, correction=False)
    return float(res.statistic), float(res.pvalue)


def _corr_z(a: np.ndarray, b: np.ndarray) -> tuple[float, float, float]:
    """Correlation, its stderr and z (robust: uses the product's sample variance)."""
    a = (a - math.fsum(a) / a.size)
    b = (b - math.fsum(b) / b.size)
    sa, sb = math.sqrt(math.fsum(a * a) / a.size), math.sqrt(math.fsum(b * b) / b.size)
    if sa == 0 or sb == 0:
        return 0.0, 0.0, 0.0
    m, se = fsum_mean(a * b / (sa * sb))
    return m, se, _z(m, se)


INDEPENDENCE_FUNCTIONALS = ("Y_1", "Y_t", "g_t", "max|Y|")
CONTRAST_FUNCTIONALS = ("sgn(W_1)", "t-gamma_t(W)")


def test_gamma_independence(scenarios, t: float,
                            contrasts: Sequence[str] = ()) -> list[McReport]:
    """Independence of ``gamma_1`` (last zero of W before 1) from the observation.

    Chi-square tests on quartile bins of ``gamma_1`` against quartile bins of
    ``Y_1``, ``Y_t``, ``g_t(Y)`` and ``max |Y|``, each passing iff
    ``p > 0.01 / m`` (Bonferroni over the ``m`` chi-square tests), plus
    correlation z-tests with ``|z| < 4``.  ``contrasts`` adds functionals of W
    itself (``"sgn(W_1)"``, independent of ``gamma_1``; ``"t-gamma_t(W)"``,
    dependent) to demonstrate the power of the test; they are reported but
    are not part of the Bonferroni family.
    """
    if not t > 1:
        raise ValueError("need t > 1")
    chk = _Checker()
    cols: dict[str, list] = {k: [] for k in ("gamma_1", *INDEPENDENCE_FUNCTIONALS, *contrasts)}
    for b in _as_batches(scenarios):
        chk(b)
        i, i1 = _tail_index(b, t), _tail_index(b, 1.0)
        ev, tz, left = zeros_of(b.W, b.grid, b.root, b.streams, LANE_BRIDGE_W)
        gam, _ = fn.last_zero_from_events(ev, tz, left)
        cols["gamma_1"].append(gam[:, i1].copy())
        cols["Y_1"].append(b.Y[:, i1].copy())
        cols["Y_t"].append(b.Y[:, i].copy())
        cols["g_t"].append(b.g[:, i].copy())
        cols["max|Y|"].append(_running_max_abs(b.Y, i))
        if "sgn(W_1)" in contrasts:
            cols["sgn(W_1)"].append(np.sign(b.W[:, i1]))
        if "t-gamma_t(W)" in contrasts:
            cols["t-gamma_t(W)"].append(t - gam[:, i])
    data = {k: np.concatenate(v) for k, v in cols.items()}
    g1 = data["gamma_1"]
    m = len(INDEPENDENCE_FUNCTIONALS)
    base = {"t": t, "alpha": chk.alpha, "kind": chk.kind, "bonferroni_m": m}
    _warn_small(chk.n, "gamma-independence", base)
    out = []
    for name in (*INDEPENDENCE_FUNCTIONALS, *contrasts):
        contrast = name in contrasts
        chi, p = _chi2_independence(g1, data[name])
        thr = P_MIN if contrast else P_MIN / m
        out.append(McReport(f"gamma-independence:chi2:{name}", chk.n, chk.grid.dt, chi,
                            math.nan, chi, p, p > thr, chk.seed,
                            dict(base, functional=name, contrast=contrast, threshold=thr)))
        r, se, z = _corr_z(g1, data[name])
        out.append(McReport(f"gamma-independence:corr:{name}", chk.n, chk.grid.dt, r, se, z,
                            _p_two_sided(z), abs(z) < Z_MAX, chk.seed,
                            dict(base, functional=name, contrast=contrast)))
    return out


# ---------------------------------------------------------------------------
# distributions


@dataclass(frozen=True)
class Law:
    """Target law of a one-sample test: ``normal``, ``half-normal`` or ``arcsine``."""

    family: str
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in ("normal", "half-normal", "arcsine"):
            raise ValueError(f"unknown law {self.family!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def normal(cls, sigma: float = 1.0) -> "Law":
        return cls("normal", sigma)

    @classmethod
    def half_normal(cls, sigma: float = 1.0) -> "Law":
        return cls("half-normal", sigma)

    @classmethod
    def arcsine(cls, t: float = 1.0) -> "Law":
        """Law of the last zero before ``t``: CDF ``(2/pi) arcsin(sqrt(s/t))``."""
        return cls("arcsine", t)

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64) / self.scale
        if self.family == "normal":
            return stats.norm.cdf(x)
        if self.family == "half-normal":
            return np.where(x > 0, 2 * stats.norm.cdf(x) - 1, 0.0)
        return (2 / math.pi) * np.arcsin(np.sqrt(np.clip(x, 0.0, 1.0)))

    def __str__(self):
        return f"{self.family}({self.scale:g})"


def test_distribution(samples, law: Law, name: str | None = None, dt: float = math.nan,
                      seed: Seed = Seed(0), params: Mapping | None = None) -> McReport:
    """One-sample KS test with the asymptotic Kolmogorov p-value; passes iff ``p > 0.01``."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    params = dict(params or {}, law=str(law))
    _warn_small(x.size, "distribution", params)
    ks = stats.kstest(x, law.cdf, method="asymp")
    m, se = fsum_mean(x)
    return McReport(name or f"ks:{law}", x.size, dt, m, se, float(ks.statistic),
                    float(ks.pvalue), ks.pvalue > P_MIN, seed, params)


def test_two_sample(a, b, name: str = "ks-two-sample", dt: float = math.nan,
                    seed: Seed = Seed(0), params: Mapping | None = None,
                    p_min: float = P_MIN) -> McReport:
    """Two-sample KS test (asymptotic p-value); passes iff ``p > p_min``."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    params = dict(params or {}, n_a=a.size, n_b=b.size, p_min=p_min)
    _warn_small(min(a.size, b.size), "two-sample", params)
    ks = stats.ks_2samp(a, b, method="asymp")
    ma, sa = fsum_mean(a)
    mb, sb = fsum_mean(b)
    return McReport(name, min(a.size, b.size), dt, ma - mb, math.hypot(sa, sb),
                    float(ks.statistic), float(ks.pvalue), ks.pvalue > p_min, seed, params)


# ---------------------------------------------------------------------------
# second kind: signs from local times, jumps, local-time relation


def local_time_counts(Y: np.ndarray, dt: float, eps: float | None = None):
    """Cumulative symmetric and right local time estimates (``(n, m+1)`` each).

    Entry ``j`` covers grid points ``0 .. j-1``:
    ``L = dt/(2 eps) #{|Y| < eps}`` and ``l = dt/eps #{0 <= Y < eps}``.
    """
    eps = math.sqrt(dt) if eps is None else eps
    Y = np.atleast_2d(Y)
    sym = np.zeros(Y.shape[:-1] + (Y.shape[-1] + 1,))
    rgt = np.zeros_like(sym)
    np.cumsum(np.abs(Y) < eps, axis=-1, out=sym[..., 1:])
    np.cumsum((Y >= 0) & (Y < eps), axis=-1, out=rgt[..., 1:])
    return sym * (dt / (2 * eps)), rgt * (dt / eps)


@dataclass
class SignRecovery:
    """Per-excursion sign estimates from one block."""

    stream: np.ndarray
    start: np.ndarray
    length: np.ndarray
    estimate: np.ndarray
    truth: np.ndarray


def recover_signs_from_Y(scenario, delta: float = 0.01,
                         eps: float | None = None) -> SignRecovery:
    """Estimate ``sgn(W_g)`` for each excursion of Y from Y alone.

    For every excursion starting at a zero ``g >= delta`` and lasting at
    least ``delta``, the window ``[g - delta, g]`` gives local time
    increments ``dl`` (right) and ``dL`` (symmetric) with
    ``dl / dL ~ 1 + alpha sgn(W)``; the estimate is
    ``sgn((dl / dL - 1) / alpha)``, or 0 if the window holds no local time.
    """
    b = scenario
    if ScenarioKind(b.kind) is not ScenarioKind.SECOND:
        raise ValueError("sign recovery applies to second-kind scenarios")
    if b.alpha == 0:
        raise ValueError("alpha = 0: signs are not identifiable from Y "
                         "(the local time ratio is constant)")
    dt = b.grid.dt
    w = int(round(delta / dt))
    T = b.grid.t_max
    sym, rgt = local_time_counts(b.Y, dt, eps)
    out = {k: [] for k in ("stream", "start", "length", "estimate", "truth")}
    for k in range(len(b.streams)):
        idx = np.flatnonzero(b.zero_event[k])[1:]  # skip the start at 0
        if idx.size == 0:
            continue
        tz = b.zero_time[k, idx]
        ends = np.append(tz[1:], T)
        length = ends - tz
        ok = (tz >= delta) & (length >= delta)
        if not ok.any():
            continue
        idx, tz, length = idx[ok], tz[ok], length[ok]
        # the window ends at the grid point left of the zero
        hi = idx  # counts cover points < idx, i.e. up to the left point idx - 1
        lo = np.maximum(hi - w, 0)
        dL = sym[k, hi] - sym[k, lo]
        dl = rgt[k, hi] - rgt[k, lo]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dL > 0, dl / dL, 1.0)
        est = np.sign((ratio - 1.0) / b.alpha)
        out["stream"].append(np.full(idx.size, b.streams[k]))
        out["start"].append(tz)
        out["length"].append(length)
        out["estimate"].append(est)
        out["truth"].append(b.sign_state[k, idx])
    cat = {k: (np.concatenate(v) if v else np.empty(0)) for k, v in out.items()}
    return SignRecovery(**cat)


def test_sign_recovery(scenarios, delta: float = 0.01, threshold: float = 0.95,
                       eps: float | None = None) -> McReport:
    """Accuracy of :func:`recover_signs_from_Y`; passes iff accuracy >= ``threshold``.

    The standard error treats paths as independent clusters of excursions.
    """
    chk = _Checker()
    hits, counts = [], []
    for b in _as_batches(scenarios):
        chk(b)
        rec = recover_signs_from_Y(b, delta, eps)
        ok = (rec.estimate == rec.truth).astype(float)
        # per-path totals in stream order
        pos = np.searchsorted(b.streams, rec.stream)
        hits.append(np.bincount(pos, ok, minlength=len(b.streams)))
        counts.append(np.bincount(pos, minlength=len(b.streams)).astype(float))
    h, c = np.concatenate(hits), np.concatenate(counts)
    acc, se = _ratio_of_means(h, c)
    params = {"alpha": chk.alpha, "delta": delta, "threshold": threshold,
              "excursions": int(c.sum()), "eps": eps if eps else math.sqrt(chk.grid.dt)}
    _warn_small(int(c.sum()), "sign-recovery", params)
    return McReport("sign-recovery", chk.n, chk.grid.dt, acc, se, acc, None,
                    bool(acc >= threshold), chk.seed, params)


def jump_indicators(batch) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per path: number of completed excursions, number of sign flips at their
    ends, and the predicted flip probability summed over them.

    An excursion of Y over ``(g, d)`` ends with a jump of the second-kind
    filter iff the sign state changes at ``d``.  For the prediction,
    ``W_g`` and ``W_d`` are jointly Gaussian with correlation
    ``sqrt(g / d)``, so ``P(sgn W_g != sgn W_d) = arccos(sqrt(g / d)) / pi``;
    ``g`` and ``d`` are the grid points at which the signs are read.
    """
    dt = batch.grid.dt
    ev = batch.zero_event.copy()
    ev[:, 0] = False
    n_exc = np.zeros(len(batch.streams))
    flips = np.zeros_like(n_exc)
    pred = np.zeros_like(n_exc)
    for k in range(len(batch.streams)):
        idx = np.flatnonzero(ev[k])
        if idx.size < 2:
            continue
        s = batch.sign_state[k, idx]
        # W is read at the grid point left of each zero (the next one at t = 0)
        left = idx - 1 + (batch.Y[k, idx] == 0)
        tl = np.maximum(left, 1) * dt
        n_exc[k] = idx.size - 1
        flips[k] = np.count_nonzero(s[1:] != s[:-1])
        rho = np.sqrt(np.clip(tl[:-1] / tl[1:], 0.0, 1.0))
        pred[k] = math.fsum(np.arccos(rho) / math.pi)
    return n_exc, flips, pred


def test_jump_fairness(scenarios) -> list[McReport]:
    """Fraction of completed excursions of Y ending with a sign flip.

    The first report is the fairness claim (fraction 1/2 within 3 standard
    errors); the second compares the fraction with the Gaussian prediction
    of :func:`jump_indicators` within 4 standard errors.
    """
    chk = _Checker()
    n_exc, flips, pred = [], [], []
    for b in _as_batches(scenarios):
        chk(b)
        a, f, p = jump_indicators(b)
        n_exc.append(a)
        flips.append(f)
        pred.append(p)
    n_exc, flips, pred = map(np.concatenate, (n_exc, flips, pred))
    frac, se = _ratio_of_means(flips, n_exc)
    pfrac, _ = _ratio_of_means(pred, n_exc)
    diff, dse = _ratio_of_means(flips - pred, n_exc)
    params = {"alpha": chk.alpha, "excursions": int(n_exc.sum()), "predicted": pfrac}
    _warn_small(int(n_exc.sum()), "jump-fairness", params)
    z_half = (frac - 0.5) / se
    z_pred = _z(diff, dse)
    return [
        McReport("jump-fairness:half", chk.n, chk.grid.dt, frac, se, z_half,
                 _p_two_sided(z_half), abs(z_half) < 3.0, chk.seed, dict(params)),
        McReport("jump-fairness:gaussian-prediction", chk.n, chk.grid.dt, frac, se, z_pred,
                 _p_two_sided(z_pred), abs(z_pred) < Z_MAX, chk.seed, dict(params)),
    ]


def test_piecewise_constancy(scenarios, c: flt.MeanderConstant = flt.DEFAULT_CONSTANT
                             ) -> McReport:
    """Second-kind filter series changes value only at steps holding a zero of Y.

    Exact assertion; the estimate is the number of violating steps.
    """
    chk = _Checker()
    bad = 0
    steps = 0
    for b in _as_batches(scenarios):
        chk(b)
        v = b.sign_state * c.c_nu * np.sqrt(b.g)
        changed = v[:, 1:] != v[:, :-1]
        bad += int(np.count_nonzero(changed & ~b.zero_event[:, 1:]))
        steps += changed.size
    return McReport("piecewise-constancy", chk.n, chk.grid.dt, float(bad), 0.0, float(bad),
                    None, bad == 0, chk.seed, {"steps": steps})


def test_local_time_relation(scenarios, t: float | None = None, eps: float | None = None,
                             tol: float = 0.07) -> McReport:
    """``sum (1 + alpha sgn W_i) dL_i`` against the right local time ``l_t``.

    Relative error of the path-averaged sums; passes iff below ``tol``.
    """
    chk = _Checker()
    lhs, rhs = [], []
    for b in _as_batches(scenarios):
        chk(b)
        i = b.grid.n_steps if t is None else _tail_index(b, t)
        sym, rgt = local_time_counts(b.Y[:, :i + 1], b.grid.dt, eps)
        dL = np.diff(sym, axis=1)
        lhs.append(np.sum((1 + b.alpha * np.sign(b.W[:, :i + 1])) * dL, axis=1))
        rhs.append(rgt[:, -1].copy())
    lhs, rhs = np.concatenate(lhs), np.concatenate(rhs)
    ratio, se = _ratio_of_means(lhs, rhs)
    err = abs(ratio - 1.0)
    params = {"alpha": chk.alpha, "t": t if t is not None else chk.grid.t_max, "tol": tol,
              "ratio": ratio}
    return McReport("local-time-relation", chk.n, chk.grid.dt, err, se, ratio, None,
                    err < tol, chk.seed, params)


# ---------------------------------------------------------------------------
# balayage


def balayage_residual(Y: np.ndarray, K: np.ndarray) -> np.ndarray:
    """``K_n Y_n - K_0 Y_0 - sum_i K_i (Y_{i+1} - Y_i)`` per path (left-point sums)."""
    Y = np.atleast_2d(Y)
    K = np.atleast_2d(K)
    return K[:, -1] * Y[:, -1] - K[:, 0] * Y[:, 0] - np.sum(K[:, :-1] * np.diff(Y, axis=1),
                                                            axis=1)


def _kernel(b, name: str) -> np.ndarray:
    if name == "one":
        return np.ones_like(b.Y)
    if name == "sign":
        return b.sign_state
    raise ValueError(f"unknown kernel {name!r}")


def mean_abs_balayage_residual(scenarios, t: float, kernel: str = "sign"
                               ) -> tuple[float, float, int, float, Seed]:
    chk = _Checker()
    res = []
    for b in _as_batches(scenarios):
        chk(b)
        i = _tail_index(b, t)
        res.append(np.abs(balayage_residual(b.Y[:, :i + 1], _kernel(b, kernel)[:, :i + 1])))
    m, se = fsum_mean(np.concatenate(res))
    return m, se, chk.n, chk.grid.dt, chk.seed


def test_balayage(coarse, fine, t: float, kernel: str = "sign", min_shrink: float = 1.6,
                  bound: float | None = None) -> McReport:
    """Mean absolute balayage residual at ``dt`` (``coarse``) and ``dt/4`` (``fine``).

    Passes iff the residual shrinks by at least ``min_shrink`` and, when a
    ``bound`` is given, the coarse residual does not exceed it.
    """
    m1, s1, n1, dt1, seed = mean_abs_balayage_residual(coarse, t, kernel)
    m2, s2, n2, dt2, _ = mean_abs_balayage_residual(fine, t, kernel)
    if m2 == 0:
        shrink, se = (math.inf if m1 > 0 else 1.0), 0.0
    else:
        shrink = m1 / m2
        se = shrink * math.hypot(s1 / m1 if m1 else 0.0, s2 / m2)
    ok = shrink >= min_shrink and (bound is None or m1 <= bound)
    params = {"t": t, "kernel": kernel, "residual_dt": m1, "residual_dt4": m2,
              "dt_fine": dt2, "min_shrink": min_shrink, "bound": bound,
              "log4_exponent": math.log(shrink) / math.log(4) if 0 < shrink < math.inf else None}
    return McReport("balayage", min(n1, n2), dt1, shrink, se, shrink, None, bool(ok), seed,
                    params)


def _left_time_of_last_zero(batch, i: int) -> np.ndarray:
    """Grid time at which the sign state in force at ``t_i`` reads W."""
    ev = batch.zero_event[:, :i + 1]
    rows = np.arange(ev.shape[0])
    last = ev.shape[1] - 1 - np.argmax(ev[:, ::-1], axis=1)
    left = last - 1 + (batch.Y[rows, last] == 0)
    return np.maximum(left, 1) * batch.grid.dt


class EarlierSignCheck(Check):
    """See :func:`test_earlier_sign_prediction`."""

    def __init__(self, t: float, fractions: Sequence[float] = (0.25, 0.5),
                 c: flt.MeanderConstant = flt.DEFAULT_CONSTANT):
        super().__init__()
        self.t, self.fractions, self.c = t, tuple(fractions), c
        self.diffs, self.raw = [], []

    def _update(self, b) -> None:
        if ScenarioKind(b.kind) is not ScenarioKind.SECOND:
            raise ValueError("applies to second-kind scenarios")
        c = self.c
        i = _tail_index(b, self.t)
        resid = b.W[:, i] - filter_values(b, i, FilterName.SECOND_KIND, c)
        tb = _left_time_of_last_zero(b, i)
        d_cols, r_cols = [], []
        for f in self.fractions:
            iu = int(round(f * i))
            ta = _left_time_of_last_zero(b, iu)
            su = b.sign_state[:, iu]
            rho = np.sqrt(np.clip(ta / tb, 0.0, 1.0))
            pred = (math.sqrt(2 / math.pi) * np.sqrt(ta)
                    - c.c_nu * np.sqrt(b.g[:, i]) * (1 - (2 / math.pi) * np.arccos(rho)))
            r_cols.append(resid * su)
            d_cols.append(resid * su - pred)
        self.diffs.append(np.stack(d_cols, axis=1))
        self.raw.append(np.stack(r_cols, axis=1))

    def result(self) -> list[McReport]:
        chk = self.chk
        diffs, raw = np.concatenate(self.diffs), np.concatenate(self.raw)
        out = []
        for j, f in enumerate(self.fractions):
            m, se = fsum_mean(diffs[:, j])
            mr, ser = fsum_mean(raw[:, j])
            z = _z(m, se)
            out.append(McReport(f"earlier-sign-prediction:s({f:g}t)", chk.n, chk.grid.dt, mr,
                                ser, z, _p_two_sided(z), abs(z) < Z_MAX, chk.seed,
                                {"t": self.t, "fraction": f, "predicted": mr - m,
                                 "residual_z": _z(mr, ser), "c_A": self.c.c_A}))
        return out


def test_earlier_sign_prediction(scenarios, t: float, fractions: Sequence[float] = (0.25, 0.5),
                                 c: flt.MeanderConstant = flt.DEFAULT_CONSTANT
                                 ) -> list[McReport]:
    """Explains the second-kind residual against earlier sign states.

    For ``u < t`` with sign states ``s_u = sgn(W_a)``, ``s_t = sgn(W_b)``
    (``a <= b`` the grid points where W is read), the zero set is independent
    of W, so

    ``E[(W_t - nu_t) s_u | zeros] = sqrt(2a/pi) - c_nu sqrt(g_t) (1 - (2/pi) arccos sqrt(a/b))``

    which is not 0: the observation reveals the sign of W on its whole zero
    set and with it information about the last zero of W before ``g_t``.
    Each report compares the realised residual with this prediction (pass iff
    ``|z| < 4``); ``params["residual_z"]`` is the z-score of the residual
    itself.
    """
    return run_checks(scenarios, EarlierSignCheck(t, fractions, c))[0]
