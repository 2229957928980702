"""Seeded multi-trial experiments: plan -> trials on disk -> aggregate table.

Every trial is a pure function of (plan, cell, trial index). Trials write
their trace CSV and a summary JSON; the aggregate table is computed only
from those summaries, so it can be rebuilt from the output directory
alone. Wall-clock timings go to ``timings.jsonl`` and nowhere else.
"""
from __future__ import annotations

import csv
import itertools
import json
import logging
import os
import statistics
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .checks import check_trace
from .exceptions import InvalidArgument, NumericalFailure
from .problem import child_seeds, generate_matrix, generate_signal, make_ensemble
from .rip import recovery_constants
from .solver import RecoveryConfig, recover

log = logging.getLogger(__name__)

PLAN_KINDS = ("gaussian", "rademacher", "identity")
THREADS_ENV = "SPARSE_RECOVER_THREADS"


@dataclass(frozen=True)
class Cell:
    d: int
    s: int
    m: int
    kind: str

    @property
    def name(self):
        return f"d{self.d}_s{self.s}_m{self.m}_{self.kind}"

    def hash(self):
        key = json.dumps(asdict(self), sort_keys=True).encode()
        return zlib.crc32(key)


@dataclass(frozen=True)
class ExperimentPlan:
    """Grid of (d, s, m) cells, each run for ``seeds_per_cell`` seeds.

    ``solver`` holds RecoveryConfig keyword arguments other than s and R
    (those come from the cell and the drawn signal). ``rip`` is ``"none"``
    or ``"exact"``; exact computes the RIP constants per trial for the
    checks and, with ``solver.gamma_source == "rip_oracle"``, for gamma.
    """

    d: tuple[int, ...]
    s: tuple[int, ...]
    m: tuple[int, ...]
    kind: str = "gaussian"
    amplitude: str = "unit"
    seeds_per_cell: int = 1
    seed_base: int = 0
    solver: dict = field(default_factory=lambda: {"gamma": 0.25, "T": 60})
    success_eps: float = 1e-4
    rip: str = "none"
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentPlan":
        raw = dict(raw)
        for key in ("d", "s", "m"):
            if key not in raw:
                raise InvalidArgument(f"plan is missing {key!r}")
            v = raw[key]
            raw[key] = tuple(int(x) for x in (v if isinstance(v, (list, tuple)) else [v]))
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidArgument(f"unknown plan keys: {sorted(unknown)}")
        plan = cls(**raw)
        plan.validate()
        return plan

    @classmethod
    def load(cls, path) -> "ExperimentPlan":
        return cls.from_dict(io.read_json(path))

    def to_dict(self):
        out = asdict(self)
        for key in ("d", "s", "m"):
            out[key] = list(out[key])
        return out

    def validate(self):
        if self.kind not in PLAN_KINDS:
            raise InvalidArgument(f"unknown ensemble kind {self.kind!r}")
        if self.seeds_per_cell < 1:
            raise InvalidArgument("seeds_per_cell must be >= 1")
        if not (self.d and self.s and self.m):
            raise InvalidArgument("d, s and m lists must be nonempty")
        if self.rip not in ("none", "exact"):
            raise InvalidArgument("rip must be 'none' or 'exact'")
        if self.success_eps <= 0:
            raise InvalidArgument("success_eps must be positive")
        for c in self.cells():
            if c.m < 1:
                raise InvalidArgument(f"cell {c.name}: need at least one measurement")
            if c.d < 1 or c.s < 1 or c.s > c.d:
                raise InvalidArgument(f"cell {c.name}: need 1 <= s <= d")
            if c.kind == "identity" and c.m != c.d:
                raise InvalidArgument(f"cell {c.name}: identity ensemble needs m == d")
        bad = {"s", "R"} & set(self.solver)
        if bad:
            raise InvalidArgument(f"solver settings may not fix {sorted(bad)}")
        # surfaces bad solver keys before any trial runs
        try:
            RecoveryConfig(s=1, R=1.0, **self.solver)
        except TypeError as exc:
            raise InvalidArgument(f"bad solver settings: {exc}") from None

    def cells(self):
        return [Cell(d, s, m, self.kind) for d, s, m in itertools.product(self.d, self.s, self.m)]

    def trial_seed(self, cell: Cell, k: int) -> int:
        return self.seed_base + cell.hash() + k


def _decay_ratio(err2):
    """Median over t of err2_{t+2} / err2_t, skipping zero denominators."""
    ratios = [err2[i + 2] / err2[i] for i in range(len(err2) - 2) if err2[i] > 0]
    return float(statistics.median(ratios)) if ratios else None


def run_trial(plan: ExperimentPlan, cell: Cell, k: int, outdir=None):
    """Generate, recover and check one trial; returns (trace, report, summary).

    A numerical failure in the solver yields a summary with ``failed`` set
    and no trace.
    """
    seed = plan.trial_seed(cell, k)
    sig_seed, mat_seed = child_seeds(seed)
    signal = generate_signal(cell.d, cell.s, plan.amplitude, sig_seed)
    if cell.kind == "identity":
        ensemble = make_ensemble(np.eye(cell.d), signal)
    else:
        ensemble = make_ensemble(generate_matrix(cell.m, cell.d, cell.kind, mat_seed),
                                 signal, cell.kind, mat_seed)
    summary = {"cell": cell.name, "d": cell.d, "s": cell.s, "m": cell.m, "kind": cell.kind,
               "trial": k, "seed": seed, "R": signal.norm_bound}
    solver_kw = dict(plan.solver)
    constants = None
    if plan.rip == "exact" or solver_kw.get("gamma_source") == "rip_oracle":
        constants = recovery_constants(ensemble.matrix, cell.s)
        summary.update(delta_s=constants.delta_s, delta_3s=constants.delta_3s,
                       theta_ss=constants.theta_ss, rip_gamma=constants.gamma)
        if solver_kw.get("gamma_source") == "rip_oracle":
            solver_kw.update(gamma=constants.gamma, gamma_source="explicit",
                             theta=constants.theta_ss, delta=constants.delta_s)
    config = RecoveryConfig(s=cell.s, R=signal.norm_bound, **solver_kw)
    try:
        trace = recover(ensemble, config, signal)
    except NumericalFailure as exc:
        summary.update(failed=True, error=str(exc), success=False, final_err2=None,
                       final_err2_rel=None, decay_ratio=None, verdicts_ok=False,
                       support_bound_ok=False, wall_time=None)
        if outdir is not None:
            _persist(outdir, cell, k, summary, None, None)
        return None, None, summary
    cfg = trace.config
    report = check_trace(
        trace, signal.values, ensemble.matrix, cfg.gamma, cell.s, signal.norm_bound,
        theta=None if constants is None else constants.theta_ss,
        delta=None if constants is None else constants.delta_s,
        delta_3s=None if constants is None else constants.delta_3s,
    )
    err2 = trace.err2
    final = float(err2[-1])
    R = signal.norm_bound
    summary.update(
        failed=False,
        gamma=cfg.gamma,
        T=cfg.T,
        final_err2=final,
        final_err2_rel=final / R if R > 0 else final,
        success=bool(final <= plan.success_eps * R),
        decay_ratio=_decay_ratio(err2),
        verdicts_ok=report.all_ok(),
        support_bound_ok=report.support_bound_holds(),
        wall_time=trace.wall_time,
    )
    if outdir is not None:
        _persist(outdir, cell, k, summary, trace, report)
    return trace, report, summary


def _trial_stem(cell, k):
    return f"{cell.name}_t{k:04d}"


def _persist(outdir, cell, k, summary, trace, report):
    outdir = Path(outdir)
    stem = _trial_stem(cell, k)
    if trace is not None:
        io.write_trace(io.ensure_dir(outdir / "traces") / f"{stem}.csv", trace, report)
        io.write_json(io.ensure_dir(outdir / "reports") / f"{stem}.json", report.to_dict())
    public = {key: v for key, v in summary.items() if key != "wall_time"}
    io.write_json(io.ensure_dir(outdir / "trials") / f"{stem}.json", public)


def _run_one(args):
    plan, cell, k, outdir = args
    _, _, summary = run_trial(plan, cell, k, outdir)
    return summary


def _workers():
    raw = os.environ.get(THREADS_ENV)
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def aggregate(summaries, cells=None):
    """Per-cell table from trial summaries; a pure function of its input."""
    by_cell = {}
    for s in summaries:
        by_cell.setdefault(s["cell"], []).append(s)
    names = [c.name for c in cells] if cells is not None else sorted(by_cell)
    table = []
    for name in names:
        rows = sorted(by_cell.get(name, []), key=lambda r: r["trial"])
        if not rows:
            continue
        n = len(rows)
        ok = [r for r in rows if not r["failed"]]
        rel = [r["final_err2_rel"] for r in ok]
        ratios = [r["decay_ratio"] for r in ok if r["decay_ratio"] is not None]
        first = rows[0]
        table.append({
            "cell": name, "d": first["d"], "s": first["s"], "m": first["m"], "kind": first["kind"],
            "trials": n,
            "failed": n - len(ok),
            "success_fraction": sum(r["success"] for r in rows) / n,
            "median_final_err2_rel": float(statistics.median(rel)) if rel else None,
            "median_decay_ratio": float(statistics.median(ratios)) if ratios else None,
            "verdict_pass_fraction": sum(r["verdicts_ok"] for r in rows) / n,
            "support_bound_fraction": sum(r["support_bound_ok"] for r in rows) / n,
        })
    return table


def read_summaries(outdir):
    return [io.read_json(p) for p in sorted(Path(outdir, "trials").glob("*.json"))]


TABLE_COLUMNS = ("cell", "d", "s", "m", "kind", "trials", "failed", "success_fraction",
                 "median_final_err2_rel", "median_decay_ratio", "verdict_pass_fraction",
                 "support_bound_fraction")


def write_table(path, table):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TABLE_COLUMNS)
        for row in table:
            w.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c])
                        for c in TABLE_COLUMNS])


@dataclass
class SweepResult:
    plan: ExperimentPlan
    table: list
    summaries: list
    output_dir: Path | None = None

    def column(self, key):
        return [row[key] for row in self.table]


def run_sweep(plan: ExperimentPlan, output_dir=None, workers=None) -> SweepResult:
    """Run every cell x seed, persist trials, then aggregate from disk."""
    plan.validate()
    outdir = output_dir or plan.output_dir
    if outdir is not None:
        outdir = io.ensure_dir(outdir)
        for sub in ("traces", "reports", "trials"):
            io.ensure_dir(outdir / sub)
        io.write_json(outdir / "plan.json", plan.to_dict())
    cells = plan.cells()
    jobs = [(plan, c, k, outdir) for c in cells for k in range(plan.seeds_per_cell)]
    workers = workers or _workers()
    start = time.perf_counter()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            summaries = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        summaries = [_run_one(j) for j in jobs]
    elapsed = time.perf_counter() - start
    if outdir is not None:
        with open(outdir / "timings.jsonl", "w") as fh:
            fh.write(json.dumps({"total_seconds": elapsed, "workers": workers,
                                 "finished": time.strftime("%Y-%m-%dT%H:%M:%S")}) + "\n")
            for s in summaries:
                fh.write(json.dumps({"cell": s["cell"], "trial": s["trial"],
                                     "wall_time": s["wall_time"]}) + "\n")
        summaries = read_summaries(outdir)
    else:
        summaries = [{k: v for k, v in s.items() if k != "wall_time"} for s in summaries]
    table = aggregate(summaries, cells)
    if outdir is not None:
        write_table(outdir / "sweep.csv", table)
        io.write_json(outdir / "sweep.json", table)
    log.info("sweep: %d trials in %.2fs", len(jobs), elapsed)
    return SweepResult(plan, table, summaries, outdir)


def spearman(x, y):
    from scipy.stats import spearmanr

    if len(set(x)) < 2 or len(set(y)) < 2:
        return float("nan")
    return float(spearmanr(x, y).statistic)
