"""Sparse signals, random measurement matrices and measurements."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgument

KINDS = ("gaussian", "rademacher", "explicit")
AMPLITUDES = ("unit", "gaussian", "uniform")


def support_of(x) -> tuple[int, ...]:
    return tuple(int(i) for i in np.flatnonzero(np.asarray(x)))


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SparseSignal:
    """Ground truth ``x_*`` with its support and norm bound ``R``."""

    values: np.ndarray
    norm_bound: float
    support: tuple[int, ...] = field(default=())

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 1:
            raise InvalidArgument("signal must be a vector")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "support", support_of(values))
        if self.norm_bound < 0:
            raise InvalidArgument("norm bound must be nonnegative")
        if np.linalg.norm(values) > self.norm_bound * (1 + 1e-12):
            raise InvalidArgument("||x||_2 exceeds the norm bound R")

    @property
    def dimension(self) -> int:
        return self.values.shape[0]

    @property
    def sparsity(self) -> int:
        return len(self.support)

    @classmethod
    def from_values(cls, values, norm_bound=None) -> "SparseSignal":
        values = np.asarray(values, dtype=np.float64)
        if norm_bound is None:
            norm_bound = float(np.linalg.norm(values))
        return cls(values, float(norm_bound))


@dataclass(frozen=True, eq=False)
class MeasurementEnsemble:
    """Matrix ``U`` (m x d), measurements ``y`` and how ``U`` was drawn."""

    matrix: np.ndarray
    measurements: np.ndarray
    kind: str = "explicit"
    rng_seed: int | None = None

    def __post_init__(self):
        U = _frozen(self.matrix)
        y = _frozen(self.measurements)
        if U.ndim != 2 or y.ndim != 1 or U.shape[0] != y.shape[0]:
            raise InvalidArgument(f"incompatible shapes U{U.shape}, y{y.shape}")
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown ensemble kind {self.kind!r}")
        object.__setattr__(self, "matrix", U)
        object.__setattr__(self, "measurements", y)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.matrix.shape[1]

    def residual(self, x) -> float:
        """Relative mismatch ||y - U x|| / ||y|| (0 when both vanish)."""
        r = np.linalg.norm(self.measurements - self.matrix @ x)
        ny = np.linalg.norm(self.measurements)
        return float(r / ny) if ny > 0 else float(r)


def generate_signal(d: int, s: int, amplitude="unit", seed: int = 0,
                    low: float = 1.0, high: float = 2.0) -> SparseSignal:
    """Draw an s-sparse vector with support uniform over the s-subsets of range(d).

    ``amplitude`` is ``"unit"`` (random signs), ``"gaussian"`` or
    ``"uniform"`` (magnitudes uniform on [low, high] with random signs).
    """
    if d < 1:
        raise InvalidArgument("d must be positive")
    if s < 0 or s > d:
        raise InvalidArgument(f"sparsity must satisfy 0 <= s <= d, got s={s}, d={d}")
    if amplitude not in AMPLITUDES:
        raise InvalidArgument(f"unknown amplitude {amplitude!r}")
    rng = np.random.default_rng(seed)
    x = np.zeros(d)
    idx = np.sort(rng.choice(d, size=s, replace=False))
    if amplitude == "unit":
        vals = rng.choice([-1.0, 1.0], size=s)
    elif amplitude == "gaussian":
        vals = rng.standard_normal(s)
        # a zero draw would shrink the support
        while np.any(vals == 0):
            vals[vals == 0] = rng.standard_normal(int(np.sum(vals == 0)))
    else:
        if not 0 < low <= high:
            raise InvalidArgument("uniform amplitude needs 0 < low <= high")
        vals = rng.uniform(low, high, size=s) * rng.choice([-1.0, 1.0], size=s)
    x[idx] = vals
    return SparseSignal.from_values(x)


def generate_matrix(m: int, d: int, kind="gaussian", seed: int = 0) -> np.ndarray:
    """Random m x d matrix with E[U^T U] = I.

    gaussian: entries N(0, 1/m); rademacher: entries +-1/sqrt(m).
    """
    if m < 1 or d < 1:
        raise InvalidArgument(f"matrix dimensions must be positive, got {m}x{d}")
    rng = np.random.default_rng(seed)
    if kind == "gaussian":
        return rng.standard_normal((m, d)) / np.sqrt(m)
    if kind == "rademacher":
        return rng.choice([-1.0, 1.0], size=(m, d)) / np.sqrt(m)
    raise InvalidArgument(f"unknown matrix kind {kind!r}")


def measure(U, x) -> np.ndarray:
    U = np.asarray(U, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if U.ndim != 2 or x.ndim != 1 or U.shape[1] != x.shape[0]:
        raise InvalidArgument(f"cannot measure a {x.shape} vector with a {U.shape} matrix")
    return U @ x


def make_ensemble(U, signal, kind="explicit", seed=None) -> MeasurementEnsemble:
    x = signal.values if isinstance(signal, SparseSignal) else signal
    return MeasurementEnsemble(np.asarray(U, dtype=np.float64), measure(U, x), kind,
                               None if kind == "explicit" else seed)


def random_ensemble(m, signal, kind="gaussian", seed=0) -> MeasurementEnsemble:
    return make_ensemble(generate_matrix(m, signal.dimension, kind, seed), signal, kind, seed)


def child_seeds(seed, n=2):
    """Independent integer seeds derived from one trial seed."""
    return [int(v) for v in np.random.SeedSequence(int(seed)).generate_state(n, dtype=np.uint64)]


def make_problem(d, s, m, kind="gaussian", seed=0, amplitude="unit"):
    """Signal and ensemble for one trial; both streams derive from ``seed``."""
    sig_seed, mat_seed = child_seeds(seed)
    signal = generate_signal(d, s, amplitude, sig_seed)
    return signal, random_ensemble(m, signal, kind, mat_seed)
