"""Per-iteration verification of the support and decay guarantees.

Every verdict is recomputed from raw iterates, the ground truth and the
measurement matrix; error columns a solver may have reported are never
consulted. Inequalities carry a relative slack of ``RTOL`` on their
right-hand side so rounding is not mistaken for a violation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgument, MissingRipConstants

RTOL = 1e-9


def _iterates(trace_or_array):
    its = getattr(trace_or_array, "iterates", trace_or_array)
    its = np.asarray(its, dtype=np.float64)
    if its.ndim != 2:
        raise InvalidArgument("iterates must be an (n, d) array")
    return its


def _support(x):
    return frozenset(np.flatnonzero(x).tolist())


def decay_bound(t, gamma, R):
    """Delta_t = (4 gamma)^((t-1)/2) R, evaluated in log space."""
    t = np.asarray(t, dtype=np.float64)
    if R == 0:
        return np.zeros_like(t)
    if gamma == 0:
        return np.where(t == 1, float(R), 0.0)
    with np.errstate(divide="ignore"):
        log_delta = 0.5 * (t - 1) * math.log(4 * gamma) + math.log(R)
    return np.exp(log_delta)


@dataclass(frozen=True)
class OffSupportCount:
    count: int
    threshold: float
    ok: bool
    # same count with the alternative 2*theta + gamma constant
    count_statement: int
    threshold_statement: float


def check_offsupport_count(x_t, x_true, U, gamma, s, theta=None, delta=None) -> OffSupportCount:
    """Count large off-support entries of (1 + gamma) x_t - U^T U (x_t - x_*).

    At most s of them may exceed (theta_ss + delta_s + gamma) / sqrt(s) * |x_t - x_*|_2
    whenever |S_t u S_*| <= 2s.
    """
    if theta is None or delta is None:
        raise MissingRipConstants(
            "off-support counting needs theta_ss and delta_s; supply them or use the exact oracle")
    if s < 1:
        raise InvalidArgument("s must be >= 1")
    x_t = np.asarray(x_t, dtype=np.float64)
    x_true = np.asarray(x_true, dtype=np.float64)
    U = np.asarray(U, dtype=np.float64)
    diff = x_t - x_true
    v = (1 + gamma) * x_t - U.T @ (U @ diff)
    off = np.abs(v[x_true == 0])
    err = float(np.linalg.norm(diff))
    thr = (theta + delta + gamma) / math.sqrt(s) * err
    thr_stmt = (2 * theta + gamma) / math.sqrt(s) * err
    count = int(np.sum(off > thr * (1 + RTOL)))
    count_stmt = int(np.sum(off > thr_stmt * (1 + RTOL)))
    return OffSupportCount(count, thr, count <= s, count_stmt, thr_stmt)


@dataclass
class SupportVerdict:
    t: int
    union2: int
    support_bound_ok: bool
    union3: int | None
    union3_ok: bool | None
    tau_admissible: bool | None
    # implication checked per step: hypothesis at t => conclusion at t+1
    hypothesis: bool | None
    conclusion: bool | None


def check_support_evolution(trace, x_true, s, taus=None, gamma=None, theta=None, delta=None):
    """Cardinality of S_t u S_* and S_* u S_t u S_{t+1} for every t.

    When the RIP constants and the taus are known, also evaluates the
    admissibility hypothesis tau_t >= (theta + delta + gamma)/sqrt(s) |x_t - x_*|_2
    and pairs it with the cardinality conclusion for t + 1.
    """
    its = _iterates(trace)
    x_true = np.asarray(x_true, dtype=np.float64)
    if taus is None:
        taus = getattr(trace, "taus", None)
    s_true = _support(x_true)
    supports = [_support(x) for x in its]
    n = len(supports)
    known = theta is not None and delta is not None and gamma is not None and taus is not None and s >= 1
    out = []
    for i in range(n):
        u2 = len(supports[i] | s_true)
        ok2 = u2 <= 2 * s
        u3 = ok3 = None
        if i + 1 < n:
            u3 = len(s_true | supports[i] | supports[i + 1])
            ok3 = u3 <= 3 * s
        adm = hyp = concl = None
        if known and i < len(taus):
            err = float(np.linalg.norm(its[i] - x_true))
            need = (theta + delta + gamma) / math.sqrt(s) * err
            adm = bool(taus[i] * (1 + RTOL) >= need)
            if i + 1 < n:
                hyp = ok2 and adm
                concl = (len(supports[i + 1] | s_true) <= 2 * s) and ok3
        out.append(SupportVerdict(i + 1, u2, ok2, u3, ok3, adm, hyp, concl))
    return out


@dataclass
class DecayVerdict:
    t: int
    err2: float
    err1: float
    bound: float
    decay2_ok: bool
    decay1_ok: bool
    decay1_2s_ok: bool
    recurrence_ok: bool | None
    applicable: bool


def check_decay(trace, x_true, gamma, R, s):
    """l2 and l1 decay bounds and the one-step recurrence, per iterate.

    Bounds hold only for gamma <= 1/4; above that every verdict is still
    computed but marked inapplicable.
    """
    its = _iterates(trace)
    x_true = np.asarray(x_true, dtype=np.float64)
    n = its.shape[0]
    diff = its - x_true
    err2 = np.linalg.norm(diff, axis=1)
    err1 = np.abs(diff).sum(axis=1)
    bounds = decay_bound(np.arange(1, n + 1), gamma, R)
    applicable = gamma <= 0.25
    out = []
    for i in range(n):
        b = float(bounds[i])
        rec = None
        if i + 1 < n:
            rhs = 4 * gamma * max(err2[i] ** 2, b * b)
            rec = bool(err2[i + 1] ** 2 <= rhs * (1 + RTOL))
        out.append(DecayVerdict(
            t=i + 1,
            err2=float(err2[i]),
            err1=float(err1[i]),
            bound=b,
            decay2_ok=bool(err2[i] <= b * (1 + RTOL)),
            decay1_ok=bool(err1[i] <= math.sqrt(s) * b * (1 + RTOL)),
            decay1_2s_ok=bool(err1[i] <= math.sqrt(2 * s) * b * (1 + RTOL)),
            recurrence_ok=rec,
            applicable=applicable,
        ))
    return out


VERDICT_KEYS = ("support2", "union3", "offsupport", "decay2", "decay1", "decay1_2s",
                "recurrence", "l1_implication", "applicable")


@dataclass
class CheckReport:
    """All verdicts for one trace; lists are indexed by t - 1."""

    s: int
    gamma: float
    R: float
    theta: float | None
    delta: float | None
    delta_3s: float | None
    rip_hypothesis: bool | None
    support: list = field(default_factory=list)
    decay: list = field(default_factory=list)
    offsupport: list = field(default_factory=list)
    applicable: list = field(default_factory=list)
    l1_implication: list = field(default_factory=list)

    @property
    def n(self):
        return len(self.decay)

    def verdicts(self, i):
        """Compact verdict dict for iterate t = i + 1 (None where not evaluated)."""
        sv, dv = self.support[i], self.decay[i]
        off = self.offsupport[i]
        return {
            "support2": sv.support_bound_ok,
            "union3": sv.union3_ok,
            "offsupport": None if off is None else off.ok,
            "decay2": dv.decay2_ok,
            "decay1": dv.decay1_ok,
            "decay1_2s": dv.decay1_2s_ok,
            "recurrence": dv.recurrence_ok,
            "l1_implication": self.l1_implication[i],
            "applicable": self.applicable[i],
        }

    def failures(self):
        """(t, verdict) pairs that fail where the guarantee applies.

        The sqrt(s) l1 bound is reported but never counted as a failure;
        the off-support count applies whenever |S_t u S_*| <= 2s.
        """
        bad = []
        for i in range(self.n):
            v = self.verdicts(i)
            if v["l1_implication"] is False:
                bad.append((i + 1, "l1_implication"))
            if v["offsupport"] is False and v["support2"]:
                bad.append((i + 1, "offsupport"))
            if not self.applicable[i]:
                continue
            for key in ("support2", "union3", "decay2", "decay1_2s"):
                if v[key] is False:
                    bad.append((i + 1, key))
            tau_ok = self.support[i].tau_admissible
            if v["recurrence"] is False and tau_ok is not False:
                bad.append((i + 1, "recurrence"))
        return bad

    def all_ok(self):
        return not self.failures()

    def support_bound_holds(self):
        return all(sv.support_bound_ok for sv in self.support)

    def to_dict(self):
        rows = []
        for i in range(self.n):
            sv, dv, off = self.support[i], self.decay[i], self.offsupport[i]
            row = {
                "t": i + 1,
                "err2": dv.err2,
                "err1": dv.err1,
                "bound": dv.bound,
                "union2": sv.union2,
                "union3": sv.union3,
                "tau_admissible": sv.tau_admissible,
                "step_hypothesis": sv.hypothesis,
                "step_conclusion": sv.conclusion,
            }
            if off is not None:
                row.update(offsupport_count=off.count, offsupport_threshold=off.threshold,
                           offsupport_count_statement=off.count_statement,
                           offsupport_threshold_statement=off.threshold_statement)
            row.update(self.verdicts(i))
            rows.append(row)
        return {
            "s": self.s, "gamma": self.gamma, "R": self.R,
            "theta_ss": self.theta, "delta_s": self.delta, "delta_3s": self.delta_3s,
            "rip_hypothesis": self.rip_hypothesis,
            "all_ok": self.all_ok(),
            "failures": [list(f) for f in self.failures()],
            "iterations": rows,
        }


def check_trace(trace, x_true, U, gamma, s, R, taus=None, theta=None, delta=None,
                delta_3s=None) -> CheckReport:
    """Run every check on a trace.

    A step is ``applicable`` when gamma <= 1/4, the RIP hypothesis
    gamma >= max(delta_3s, theta + delta) is not known to fail, and tau was
    admissible at every earlier step where that could be evaluated.
    """
    its = _iterates(trace)
    x_true = np.asarray(x_true, dtype=np.float64)
    if taus is None:
        taus = getattr(trace, "taus", None)
    if s < 1:
        raise InvalidArgument("checks need s >= 1")
    support = check_support_evolution(its, x_true, s, taus, gamma, theta, delta)
    decay = check_decay(its, x_true, gamma, R, s)
    off = [None] * len(its)
    if theta is not None and delta is not None:
        off = [check_offsupport_count(x, x_true, U, gamma, s, theta, delta) for x in its]
    rip_hyp = None
    if theta is not None and delta is not None and delta_3s is not None:
        rip_hyp = bool(gamma * (1 + RTOL) >= max(delta_3s, theta + delta))
    applicable = []
    chain = gamma <= 0.25 and rip_hyp is not False
    for i in range(len(its)):
        applicable.append(chain)
        if support[i].tau_admissible is False:
            chain = False
    implication = []
    for sv, dv in zip(support, decay):
        implication.append(bool(dv.err1 <= math.sqrt(sv.union2) * dv.err2 * (1 + RTOL) + 1e-300))
    return CheckReport(s, gamma, R, theta, delta, delta_3s, rip_hyp, support, decay, off,
                       applicable, implication)


def verdict_string(verdicts: dict) -> str:
    """``key=1;key=0;key=na`` encoding used in trace CSV files."""
    parts = []
    for k in VERDICT_KEYS:
        v = verdicts.get(k)
        parts.append(f"{k}={'na' if v is None else int(bool(v))}")
    return ";".join(parts)


def parse_verdict_string(text: str) -> dict:
    out = {}
    for part in filter(None, text.split(";")):
        k, _, v = part.partition("=")
        out[k] = None if v == "na" else v == "1"
    return out
