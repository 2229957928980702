"""Restricted isometry (delta_s) and restricted orthogonality (theta_ss) constants.

The exact oracles enumerate every column subset (or disjoint pair of
subsets) and refuse to run past an enumeration budget. The sampled
variants maximize over random subsets and therefore only ever return a
lower bound on the exact value.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from math import comb

import numpy as np

from . import kernels
from .exceptions import BudgetExceeded, InvalidArgument

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class RipEstimate:
    s: int
    delta: float
    theta: float | None
    method: str
    subsets_examined: int

    def to_dict(self):
        return asdict(self)


def _gram(U):
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2:
        raise InvalidArgument("matrix expected")
    return np.ascontiguousarray(U.T @ U)


def _check_s(s, d):
    if s < 1 or s > d:
        raise InvalidArgument(f"need 1 <= s <= d, got s={s}, d={d}")


def pair_count(d, s):
    """Number of unordered pairs of disjoint s-subsets of range(d)."""
    return comb(d, s) * comb(d - s, s) // 2


def _closed_form_delta(G, s):
    d = G.shape[0]
    diag = np.diag(G)
    if s == 1:
        return float(np.max(np.abs(diag - 1.0)))
    i, j = np.triu_indices(d, 1)
    a, c, b = diag[i] - 1.0, diag[j] - 1.0, G[i, j]
    mean, half = (a + c) / 2, (a - c) / 2
    rad = np.sqrt(half * half + b * b)
    return float(np.max(np.maximum(np.abs(mean + rad), np.abs(mean - rad))))


def _closed_form_theta(G, s):
    d = G.shape[0]
    if s == 1:
        return float(np.max(np.abs(G[np.triu_indices(d, 1)])))
    best = 0.0
    for a in range(d):
        for b in range(a + 1, d):
            rest = [k for k in range(a + 1, d) if k not in (a, b)]
            for ci, c in enumerate(rest):
                for e in rest[ci + 1:]:
                    B = G[np.ix_((a, b), (c, e))]
                    fro2 = float(np.sum(B * B))
                    det = B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
                    disc = max(fro2 * fro2 - 4 * det * det, 0.0)
                    best = max(best, np.sqrt((fro2 + np.sqrt(disc)) / 2))
    return float(best)


def _crosscheck(value, other, what):
    if abs(value - other) > 1e-10 * max(1.0, abs(value)):
        raise RuntimeError(f"{what}: enumeration gave {value!r}, closed form gave {other!r}")


def delta_exact(U, s, budget=DEFAULT_BUDGET) -> float:
    """Smallest delta with (1-delta)|x|^2 <= |U_T x|^2 <= (1+delta)|x|^2 for |T| <= s.

    Computed as the max over all s-subsets of ||U_T^T U_T - I||_2; subsets
    of size below s are dominated by eigenvalue interlacing.
    """
    return delta_estimate(U, s, budget).delta


def delta_estimate(U, s, budget=DEFAULT_BUDGET) -> RipEstimate:
    G = _gram(U)
    d = G.shape[0]
    _check_s(s, d)
    n = comb(d, s)
    if n > budget:
        raise BudgetExceeded(
            f"C({d},{s}) = {n} subsets exceeds the budget of {budget}; use delta_sampled")
    value, count = kernels.max_deviation_all(G, s)
    if s <= 2:
        _crosscheck(value, _closed_form_delta(G, s), "delta")
    return RipEstimate(s, float(value), None, "exact", int(count))


def theta_exact(U, s, budget=DEFAULT_BUDGET) -> float:
    """Smallest theta with |<U_T x, U_T' x'>| <= theta |x| |x'| over disjoint |T|, |T'| <= s."""
    G = _gram(U)
    d = G.shape[0]
    if s < 1 or 2 * s > d:
        raise InvalidArgument(f"theta_ss needs 1 <= s and 2s <= d, got s={s}, d={d}")
    n = pair_count(d, s)
    if n > budget:
        raise BudgetExceeded(
            f"{n} disjoint subset pairs exceeds the budget of {budget}; use theta_sampled")
    value, _ = kernels.max_cross_all(G, s)
    if s == 1 or (s == 2 and d <= 24):
        _crosscheck(value, _closed_form_theta(G, s), "theta")
    return float(value)


def rip_exact(U, s, budget=DEFAULT_BUDGET) -> RipEstimate:
    est = delta_estimate(U, s, budget)
    d = np.shape(U)[1]
    theta = theta_exact(U, s, budget) if 2 * s <= d else None
    examined = est.subsets_examined + (pair_count(d, s) if theta is not None else 0)
    return RipEstimate(s, est.delta, theta, "exact", examined)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _sample_subsets(rng, d, k, trials):
    seen = set()
    for _ in range(trials):
        seen.add(tuple(sorted(rng.choice(d, size=k, replace=False).tolist())))
    return sorted(seen)


def delta_sampled(U, s, trials, seed=None) -> RipEstimate:
    """Max of ||U_T^T U_T - I||_2 over ``trials`` random s-subsets (a lower bound)."""
    if trials < 1:
        raise InvalidArgument("trials must be >= 1")
    G = _gram(U)
    d = G.shape[0]
    _check_s(s, d)
    if trials >= comb(d, s):
        value, count = kernels.max_deviation_all(G, s)
        return RipEstimate(s, float(value), None, "monte-carlo", int(count))
    subsets = _sample_subsets(_rng(seed), d, s, trials)
    idx = np.array(subsets, dtype=np.int64)
    value = kernels.max_deviation_subsets(G, idx)
    return RipEstimate(s, float(value), None, "monte-carlo", len(subsets))


def theta_sampled(U, s, trials, seed=None) -> RipEstimate:
    """Max of ||U_T^T U_T'||_2 over ``trials`` random disjoint pairs (a lower bound)."""
    if trials < 1:
        raise InvalidArgument("trials must be >= 1")
    G = _gram(U)
    d = G.shape[0]
    if s < 1 or 2 * s > d:
        raise InvalidArgument(f"theta_ss needs 1 <= s and 2s <= d, got s={s}, d={d}")
    if trials >= pair_count(d, s):
        value, count = kernels.max_cross_all(G, s)
        return RipEstimate(s, 0.0, float(value), "monte-carlo", int(count))
    rng = _rng(seed)
    seen = set()
    for _ in range(trials):
        pick = rng.choice(d, size=2 * s, replace=False)
        a, b = tuple(sorted(pick[:s].tolist())), tuple(sorted(pick[s:].tolist()))
        seen.add((a, b) if a[0] < b[0] else (b, a))
    pairs = sorted(seen)
    ia = np.array([p[0] for p in pairs], dtype=np.int64)
    ib = np.array([p[1] for p in pairs], dtype=np.int64)
    value = kernels.max_cross_pairs(G, ia, ib)
    return RipEstimate(s, 0.0, float(value), "monte-carlo", len(pairs))


def rip_sampled(U, s, trials, seed=None) -> RipEstimate:
    rng = _rng(seed)
    d = np.shape(U)[1]
    dl = delta_sampled(U, s, trials, rng)
    th = theta_sampled(U, s, trials, rng) if 2 * s <= d else None
    return RipEstimate(s, dl.delta, th.theta if th else None, "monte-carlo",
                       dl.subsets_examined + (th.subsets_examined if th else 0))


@dataclass(frozen=True)
class RecoveryConstants:
    """RIP quantities that set gamma and the tau schedule."""

    s: int
    delta_s: float
    delta_2s: float | None
    delta_3s: float
    theta_ss: float

    @property
    def gamma(self) -> float:
        """Smallest admissible gamma, max(delta_3s, theta_ss + delta_s)."""
        return max(self.delta_3s, self.theta_ss + self.delta_s)

    @property
    def tau_coefficient_base(self) -> float:
        """theta_ss + delta_s; the schedule coefficient adds gamma to it."""
        return self.theta_ss + self.delta_s


def recovery_constants(U, s, budget=DEFAULT_BUDGET) -> RecoveryConstants:
    """Exact delta_s, delta_2s, delta_3s and theta_ss of ``U``.

    3s is clipped to d: for 3s > d every subset is contained in the full
    column set, so delta_d is the right value.
    """
    d = np.shape(U)[1]
    if 2 * s > d:
        raise InvalidArgument(f"need 2s <= d for theta_ss, got s={s}, d={d}")
    ds = delta_exact(U, s, budget)
    d2 = delta_exact(U, min(2 * s, d), budget)
    d3 = delta_exact(U, min(3 * s, d), budget)
    th = theta_exact(U, s, budget)
    return RecoveryConstants(s, ds, d2, d3, th)
