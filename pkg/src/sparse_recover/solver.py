"""Composite proximal-gradient recovery with a geometrically decaying l1 weight.

Each iteration takes a gradient step on 1/2||x - x_*||^2 using the
measurement-based estimate U^T(U x - y) and then soft-thresholds:

    xhat    = x_t - U^T(U x_t - y) / (1 + gamma)
    x_{t+1} = sign(xhat) * max(|xhat| - tau_t / (1 + gamma), 0)

with tau_t = c / sqrt(s) * (4 gamma)^((t-1)/2) * R, c = theta_ss + delta_s + gamma.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .exceptions import InvalidArgument, NumericalFailure
from .problem import MeasurementEnsemble, SparseSignal
from .rip import DEFAULT_BUDGET, recovery_constants

TAU_MODES = ("geometric", "explicit", "constant")
GAMMA_SOURCES = ("explicit", "rip_oracle", "plugin")
PLUGIN_GAMMA = 0.25


def approx_gradient(U, y, x):
    """U^T (U x - y), as two matrix-vector products."""
    U = np.asarray(U, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if U.ndim != 2 or U.shape != (y.shape[0], x.shape[0]):
        raise InvalidArgument(f"shape mismatch: U{U.shape}, y{y.shape}, x{x.shape}")
    return U.T @ (U @ x - y)


def soft_threshold(v, threshold):
    """Componentwise sign(v) * max(|v| - threshold, 0)."""
    if not threshold >= 0:
        raise InvalidArgument(f"threshold must be nonnegative, got {threshold}")
    v = np.ascontiguousarray(v, dtype=np.float64)
    return kernels.soft_threshold(v, float(threshold))


def prox_step(x, grad, tau, gamma):
    """argmin_z tau|z|_1 + <z - x, grad> + (1 + gamma)/2 |z - x|^2."""
    if gamma < 0:
        raise InvalidArgument(f"gamma must be nonnegative, got {gamma}")
    if not tau >= 0:
        raise InvalidArgument(f"tau must be nonnegative, got {tau}")
    step = 1.0 / (1.0 + gamma)
    x = np.asarray(x, dtype=np.float64)
    return soft_threshold(x - step * np.asarray(grad, dtype=np.float64), tau * step)


def composite_objective(z, x, grad, tau, gamma):
    z = np.asarray(z)
    diff = z - x
    return tau * np.abs(z).sum(axis=-1) + diff @ grad + 0.5 * (1 + gamma) * (diff * diff).sum(axis=-1)


def tau_schedule(t, gamma, theta_ss, delta_s, s, R):
    """tau_t = (theta_ss + delta_s + gamma) / sqrt(s) * (4 gamma)^((t-1)/2) * R."""
    if s < 1:
        raise InvalidArgument("tau schedule needs s >= 1")
    if t < 1:
        raise InvalidArgument("iterations are numbered from t = 1")
    if min(gamma, theta_ss, delta_s, R) < 0:
        raise InvalidArgument("schedule constants must be nonnegative")
    return (theta_ss + delta_s + gamma) / math.sqrt(s) * _decay(gamma, t) * R


def _decay(gamma, t):
    # (4 gamma)^((t-1)/2) with 0^0 = 1
    if t == 1:
        return 1.0
    return (4.0 * gamma) ** ((t - 1) / 2)


def exact_gradient_step(x, x_true):
    """Unit gradient step on 1/2||x - x_*||^2; lands on x_* in one move."""
    x = np.asarray(x, dtype=np.float64)
    return x - (x - np.asarray(x_true, dtype=np.float64))


def iterations_for_accuracy(gamma, R, eps):
    """Iteration budget after which the decay bound (4 gamma)^((t-1)/2) R drops below eps, plus one spare step."""
    if eps <= 0:
        raise InvalidArgument("eps must be positive")
    if not 0 <= gamma < 0.25:
        raise InvalidArgument("deriving T from eps requires 0 <= gamma < 1/4; pass T explicitly")
    if gamma == 0 or R <= eps:
        return 1
    return math.ceil(2 * math.log(R / eps) / math.log(1 / (4 * gamma))) + 1


@dataclass(frozen=True)
class RecoveryConfig:
    """Solver parameters.

    ``tau_mode="geometric"`` builds the geometric schedule from
    ``tau_coefficient`` (the theta_ss + delta_s + gamma factor); when that is
    None it comes from ``theta``/``delta`` if known, otherwise from the
    plug-in ``tau_plugin * gamma``.
    """

    s: int
    R: float
    T: int | None = None
    eps: float | None = None
    gamma: float = PLUGIN_GAMMA
    gamma_source: str = "explicit"
    tau_mode: str = "geometric"
    taus: tuple[float, ...] | None = None
    tau_constant: float | None = None
    tau_coefficient: float | None = None
    tau_plugin: float = 3.0
    theta: float | None = None
    delta: float | None = None
    stop_early: bool = False
    oracle_budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.gamma_source not in GAMMA_SOURCES:
            raise InvalidArgument(f"unknown gamma source {self.gamma_source!r}")
        if self.tau_mode not in TAU_MODES:
            raise InvalidArgument(f"unknown tau mode {self.tau_mode!r}")
        if self.gamma < 0:
            raise InvalidArgument("gamma must be nonnegative")
        if self.R < 0:
            raise InvalidArgument("R must be nonnegative")
        if self.s < 0:
            raise InvalidArgument("s must be nonnegative")
        if self.T is None and self.eps is None and self.tau_mode != "explicit":
            raise InvalidArgument("give T or eps")
        if self.T is not None and self.T < 1:
            raise InvalidArgument("T must be >= 1")
        if self.tau_mode == "explicit":
            if not self.taus:
                raise InvalidArgument("explicit tau mode needs taus")
            if self.T is not None and len(self.taus) != self.T:
                raise InvalidArgument("len(taus) must equal T")
            if min(self.taus) < 0:
                raise InvalidArgument("taus must be nonnegative")
        if self.tau_mode == "constant" and (self.tau_constant is None or self.tau_constant < 0):
            raise InvalidArgument("constant tau mode needs tau_constant >= 0")

    def resolve(self, U=None) -> "RecoveryConfig":
        """Fix gamma, the schedule coefficient and T; queries the RIP oracle if asked to."""
        cfg = self
        if cfg.gamma_source == "rip_oracle":
            if U is None:
                raise InvalidArgument("rip_oracle gamma needs the measurement matrix")
            k = recovery_constants(U, cfg.s, cfg.oracle_budget)
            cfg = replace(cfg, gamma=k.gamma, theta=k.theta_ss, delta=k.delta_s,
                          gamma_source="explicit")
        elif cfg.gamma_source == "plugin":
            cfg = replace(cfg, gamma=PLUGIN_GAMMA, gamma_source="explicit")
        if cfg.tau_mode == "geometric" and cfg.tau_coefficient is None:
            if cfg.theta is not None and cfg.delta is not None:
                coef = cfg.theta + cfg.delta + cfg.gamma
            else:
                coef = cfg.tau_plugin * cfg.gamma
            cfg = replace(cfg, tau_coefficient=coef)
        if cfg.T is None:
            T = len(cfg.taus) if cfg.tau_mode == "explicit" else iterations_for_accuracy(cfg.gamma, cfg.R, cfg.eps)
            cfg = replace(cfg, T=T)
        return cfg

    def tau_sequence(self) -> np.ndarray:
        """tau_1 .. tau_T for a resolved config."""
        if self.tau_mode == "explicit":
            return np.array(self.taus, dtype=np.float64)
        if self.tau_mode == "constant":
            return np.full(self.T, float(self.tau_constant))
        if self.s < 1:
            raise InvalidArgument("tau schedule needs s >= 1")
        c = self.tau_coefficient
        return np.array([c / math.sqrt(self.s) * _decay(self.gamma, t) * self.R
                         for t in range(1, self.T + 1)])

    def to_dict(self):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        if d["taus"] is not None:
            d["taus"] = list(d["taus"])
        return d


@dataclass
class IterateTrace:
    """Iterates x_1 .. x_{n} (row t-1 holds x_t) and the tau used at each step."""

    iterates: np.ndarray
    taus: np.ndarray
    config: RecoveryConfig
    x_true: np.ndarray | None = None
    stopped_at: int | None = None
    wall_time: float = 0.0
    verdicts: list | None = field(default=None, repr=False)

    @property
    def n_iterates(self):
        return self.iterates.shape[0]

    def supports(self):
        return [frozenset(np.flatnonzero(x).tolist()) for x in self.iterates]

    @property
    def err2(self):
        if self.x_true is None:
            return None
        return np.linalg.norm(self.iterates - self.x_true, axis=1)

    @property
    def err1(self):
        if self.x_true is None:
            return None
        return np.abs(self.iterates - self.x_true).sum(axis=1)

    @property
    def final(self):
        return self.iterates[-1]


def recover(ensemble: MeasurementEnsemble, config: RecoveryConfig, x_true=None) -> IterateTrace:
    """Run T iterations from x_1 = 0 and return every iterate.

    ``x_true`` is only attached to the trace for error reporting; the
    iteration never reads it.
    """
    U = ensemble.matrix
    y = ensemble.measurements
    cfg = config.resolve(U)
    taus = cfg.tau_sequence()
    if isinstance(x_true, SparseSignal):
        x_true = x_true.values
    if x_true is not None:
        x_true = np.asarray(x_true, dtype=np.float64)
        if x_true.shape != (ensemble.d,):
            raise InvalidArgument("x_true has the wrong dimension")

    start = time.perf_counter()
    step = 1.0 / (1.0 + cfg.gamma)
    xs = np.zeros((cfg.T + 1, ensemble.d))
    stopped_at = None
    n = cfg.T + 1
    x = xs[0]
    for t in range(1, cfg.T + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            xhat = x - step * (U.T @ (U @ x - y))
        if not np.all(np.isfinite(xhat)):
            raise NumericalFailure(t)
        x_next = kernels.soft_threshold(xhat, taus[t - 1] * step)
        xs[t] = x_next
        if cfg.stop_early and np.array_equal(x_next, x) and taus[t - 1] <= taus[t - 1:].min():
            stopped_at = t
            n = t + 1
            break
        x = x_next
    wall = time.perf_counter() - start
    return IterateTrace(xs[:n].copy(), taus[:n - 1].copy(), cfg, x_true, stopped_at, wall)
