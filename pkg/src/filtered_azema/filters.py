"""
Closed-form optional projections and conditional laws.

The classical Azema martingale is ``sgn(W_t) * c_A * sqrt(t - gamma_t)``.  The
value of the meander constant ``c_A`` is carried explicitly by
:class:`MeanderConstant` so that the alternative value ``pi/2`` and the value
selected by the Monte Carlo calibration (``sqrt(pi/2)``, the Rayleigh mean) can
be compared side by side; every formula that depends on it takes one.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss
from scipy import special

from . import functionals as fn
from .paths import SamplePath

SQRT_PI_2 = math.sqrt(math.pi / 2)
SQRT_2_PI = math.sqrt(2 / math.pi)


class ConstantMode(str, enum.Enum):
    PAPER_VERBATIM = "paper-verbatim"
    ORACLE_DERIVED = "oracle-derived"


class MomentMode(str, enum.Enum):
    DENSITY_EXACT = "density-exact"
    PAPER_VERBATIM = "paper-verbatim"


@dataclass(frozen=True)
class MeanderConstant:
    """Constant ``c_A`` in ``E[W_t | signs] = sgn(W_t) c_A sqrt(t - gamma_t)``."""

    c_A: float
    mode: ConstantMode

    def __post_init__(self):
        if not self.c_A > 0:
            raise ValueError(f"c_A must be positive, got {self.c_A}")
        object.__setattr__(self, "mode", ConstantMode(self.mode))

    @classmethod
    def paper_verbatim(cls) -> "MeanderConstant":
        return cls(math.pi / 2, ConstantMode.PAPER_VERBATIM)

    @classmethod
    def oracle_derived(cls, value: float = SQRT_PI_2) -> "MeanderConstant":
        return cls(value, ConstantMode.ORACLE_DERIVED)

    @classmethod
    def from_mode(cls, mode) -> "MeanderConstant":
        mode = ConstantMode(mode)
        return cls.paper_verbatim() if mode is ConstantMode.PAPER_VERBATIM else cls.oracle_derived()

    @property
    def c_nu(self) -> float:
        """Constant of the second-kind filter, ``c_A * 2 / pi``."""
        return self.c_A * 2 / math.pi

    @property
    def meander_scale(self) -> float:
        """``c_A`` relative to the Rayleigh mean ``sqrt(pi/2)``."""
        return self.c_A / SQRT_PI_2


# Calibration (oracle.calibrate_meander_constant) selects sqrt(pi/2); see README.
DEFAULT_CONSTANT = MeanderConstant.oracle_derived()


def normal_cdf(x):
    """Standard normal CDF, accurate to ~1e-16 relative in both tails."""
    return special.ndtr(x)


def heat_kernel(t: float, x):
    """``p(t, x) = exp(-x^2 / 2t) / sqrt(2 pi t)`` for ``t > 0``."""
    if not t > 0:
        raise ValueError(f"heat kernel needs t > 0, got {t}")
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-x * x / (2 * t)) / math.sqrt(2 * math.pi * t)


def azema_classical(W: SamplePath, t: float, c: MeanderConstant = DEFAULT_CONSTANT) -> float:
    """``sgn(W_t) c_A sqrt(t - gamma_t)``; ``W_t`` linearly interpolated off-grid."""
    gamma = fn.last_zero(W, t)
    w_t = float(np.interp(t, W.times, W.values))
    return fn.sgn(w_t) * c.c_A * math.sqrt(max(t - gamma, 0.0))


def sign_posterior(y, alpha: float):
    """``E[sgn(W_{g_t}) | F^Y_t] = tanh(alpha * Y_t)`` for the first kind."""
    return np.tanh(alpha * np.asarray(y, dtype=np.float64))


def first_kind_value(g, y, alpha: float):
    return np.sqrt(2 * np.asarray(g) / math.pi) * np.tanh(alpha * np.asarray(y))


def _time_index(scenario, t: float) -> int:
    return scenario.grid.index(t)


def filter_first_kind(scenario, t: float) -> float:
    """``sqrt(2 g_t / pi) tanh(alpha Y_t)`` evaluated on a first-kind scenario."""
    if not scenario.kind.is_first:
        raise ValueError(f"first-kind filter needs a first-kind scenario, got {scenario.kind}")
    i = _time_index(scenario, t)
    return float(first_kind_value(scenario.g[i], scenario.Y[i], scenario.alpha))


def filter_second_kind(scenario, t: float, c: MeanderConstant = DEFAULT_CONSTANT) -> float:
    """``sgn(W_{g_t}) c_nu sqrt(g_t)`` on a second-kind scenario."""
    from .solvers import ScenarioKind
    if scenario.kind is not ScenarioKind.SECOND:
        raise ValueError(f"second-kind filter needs a second-kind scenario, got {scenario.kind}")
    i = _time_index(scenario, t)
    return float(scenario.sign_state[i] * c.c_nu * math.sqrt(scenario.g[i]))


@dataclass
class FilterSeries:
    times: np.ndarray
    values: np.ndarray
    g_values: np.ndarray
    y_values: np.ndarray
    sign_state: np.ndarray | None = None

    def to_csv(self) -> str:
        lines = ["t,g,value"]
        for t, g, v in zip(self.times, self.g_values, self.values):
            lines.append(f"{float(t)!r},{float(g)!r},{float(v)!r}")
        return "\n".join(lines) + "\n"


def first_kind_series(scenario) -> FilterSeries:
    if not scenario.kind.is_first:
        raise ValueError(f"first-kind filter needs a first-kind scenario, got {scenario.kind}")
    vals = first_kind_value(scenario.g, scenario.Y, scenario.alpha)
    return FilterSeries(scenario.grid.times, vals, scenario.g, scenario.Y)


def second_kind_series(scenario, c: MeanderConstant = DEFAULT_CONSTANT) -> FilterSeries:
    from .solvers import ScenarioKind
    if scenario.kind is not ScenarioKind.SECOND:
        raise ValueError(f"second-kind filter needs a second-kind scenario, got {scenario.kind}")
    vals = scenario.sign_state * c.c_nu * np.sqrt(scenario.g)
    return FilterSeries(scenario.grid.times, vals, scenario.g, scenario.Y, scenario.sign_state)


# ---------------------------------------------------------------------------
# first kind: conditional density and moments


def _check_tg(t: float, g_t: float) -> None:
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if not 0 <= g_t <= t:
        raise ValueError(f"need 0 <= g_t <= t, got g_t={g_t}, t={t}")


def conditional_density_first_kind(t: float, x, y_t: float, g_t: float, alpha: float):
    """Density of ``W_t`` given the first-kind observation up to ``t``.

    ``p(t, x) [Phi(c x) e^{a} + Phi(-c x) e^{-a}] / cosh(a)`` with
    ``a = alpha y_t`` and ``c = sqrt(g / (t (t - g)))``, written as
    ``p(t, x) (1 + tanh(a) erf(c x / sqrt 2))`` which is exactly odd-symmetric
    and safe for large ``|a|``.  ``g_t = t`` uses the limit ``erf -> sign(x)``.
    """
    _check_tg(t, g_t)
    x = np.asarray(x, dtype=np.float64)
    tau = math.tanh(alpha * y_t)
    if g_t == t:
        e = np.sign(x)
    else:
        c = math.sqrt(g_t / (t * (t - g_t)))
        e = special.erf(c * x / math.sqrt(2))
    return heat_kernel(t, x) * (1.0 + tau * e)


def _half_gaussian_moment(k: int, a: float) -> float:
    """``int_0^inf x^k p(a, x) dx``."""
    return (2 * a) ** (k / 2) * math.gamma((k + 1) / 2) / (2 * math.sqrt(math.pi))


def _gaussian_moment(k: int, var: float) -> float:
    if k % 2:
        return 0.0
    return var ** (k // 2) * math.prod(range(k - 1, 0, -2))


def conditional_moment_first_kind(n: int, t: float, g_t: float, y_t: float, alpha: float,
                                  mode=MomentMode.DENSITY_EXACT) -> float:
    """``E[W_t^n | F^Y_t]`` for the first kind.

    ``DENSITY_EXACT`` splits ``W_t = W_{g} + R`` with ``R ~ N(0, t - g)``
    independent and ``W_g`` distributed as ``p(g, x)(1 + tanh(alpha y) sgn x)``.
    ``PAPER_VERBATIM`` evaluates the alternative even/odd formula, kept for
    comparison only (it gives ``1/sqrt(pi)`` at ``n = 0``).
    """
    mode = MomentMode(mode)
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n}")
    if n > 12:
        raise ValueError("moments above n = 12 are not supported")
    _check_tg(t, g_t)
    tau = math.tanh(alpha * y_t)
    if mode is MomentMode.PAPER_VERBATIM:
        k = n // 2
        if n % 2 == 0:
            return math.factorial(2 * k) / (math.sqrt(math.pi) * math.factorial(k)) * (g_t / 2) ** k
        return math.factorial(k) / math.sqrt(math.pi) * (2 * g_t) ** (k + 0.5) * tau
    total = 0.0
    for k in range(n + 1):
        if k % 2 == 0:
            mk = _gaussian_moment(k, g_t)
        else:
            mk = 2 * tau * _half_gaussian_moment(k, g_t)
        total += math.comb(n, k) * mk * _gaussian_moment(n - k, t - g_t)
    return total


# ---------------------------------------------------------------------------
# second kind: conditional law by quadrature


@dataclass(frozen=True)
class QuadratureParams:
    """Tensor Gauss rules, all orders doubled until two levels agree to ``tol``."""

    theta_nodes: int = 128
    y_nodes: int = 128
    hermite_nodes: int = 64
    y_max: float = 10.0
    tol: float = 1e-8
    max_doublings: int = 3


_BLOCK = 4_000_000


class QuadratureError(RuntimeError):
    def __init__(self, value: float, error: float):
        super().__init__(f"quadrature did not converge: estimate {value!r}, "
                         f"successive-level difference {error:.3g}")
        self.value = value
        self.error = error


def _smooth(F: Callable, x: np.ndarray, var: float, n_herm: int) -> np.ndarray:
    """``f(x) = E[F(x + sqrt(var) Z)]`` by Gauss-Hermite; ``F`` itself when ``var == 0``."""
    if var == 0:
        out = _call(F, x)
    else:
        z, w = hermegauss(n_herm)
        w = w / math.sqrt(2 * math.pi)
        out = _call(F, x[..., None] + math.sqrt(var) * z) @ w
    return out


def _call(F: Callable, x: np.ndarray) -> np.ndarray:
    try:
        v = np.asarray(F(x), dtype=np.float64)
        if v.shape != x.shape:
            v = np.broadcast_to(v, x.shape)
    except (TypeError, ValueError):
        v = np.vectorize(F, otypes=[np.float64])(x)
    if not np.all(np.isfinite(v)):
        raise ValueError("F returned non-finite values")
    return v


def conditional_law_second_kind(F: Callable, t: float, g_t: float, sign: int,
                                c: MeanderConstant = DEFAULT_CONSTANT,
                                quad: QuadratureParams = QuadratureParams()) -> float:
    """``E[F(W_t) | F^Y_t]`` for the second kind, given ``g_t`` and ``sgn(W_{g_t})``.

    ``W_{g}`` is ``sign * sqrt(g - r) * M`` with ``r`` (the last zero of W
    before ``g``) arcsine on ``[0, g]`` and ``M`` Rayleigh, scaled by
    ``c.meander_scale`` so that the mean of the law equals
    :func:`filter_second_kind` for the same constant.  The arcsine integral is
    mapped to ``theta`` in ``[0, pi/2]`` by ``r = g sin^2 theta``, which
    removes both endpoint singularities.
    """
    if not 0 < g_t <= t:
        raise ValueError(f"need 0 < g_t <= t, got g_t={g_t}, t={t}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    scale = sign * c.meander_scale * math.sqrt(g_t)
    prev = None
    for level in range(quad.max_doublings + 1):
        m = 2 ** level
        th, wth = leggauss(quad.theta_nodes * m)
        th = (th + 1) * (math.pi / 4)
        wth = wth * (math.pi / 4)
        y, wy = leggauss(quad.y_nodes * m)
        y = (y + 1) * (quad.y_max / 2)
        wy = wy * (quad.y_max / 2)
        arg = (scale * y)[:, None] * np.cos(th)[None, :]
        n_h = quad.hermite_nodes * m
        # row blocks keep the (y, theta, hermite) tensor near 4e6 entries
        rows = max(1, _BLOCK // (arg.shape[1] * (n_h if t > g_t else 1)))
        h = np.concatenate([_smooth(F, arg[k:k + rows], t - g_t, n_h) @ wth
                            for k in range(0, arg.shape[0], rows)]) * (2 / math.pi)
        val = float(np.sum(wy * h * y * np.exp(-0.5 * y * y)))
        if prev is not None and abs(val - prev) < quad.tol:
            return val
        # a single level gives no convergence estimate
        err = math.inf if prev is None else abs(val - prev)
        prev = val
    raise QuadratureError(prev, err)
