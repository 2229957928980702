"""Command line entry point: ``sparse-recover {gen,recover,rip,verify,sweep}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .checks import check_trace
from .exceptions import InvalidArgument, NumericalFailure
from .harness import ExperimentPlan, run_sweep
from .problem import (MeasurementEnsemble, child_seeds, generate_matrix, generate_signal,
                      make_ensemble)
from .rip import DEFAULT_BUDGET, rip_exact, rip_sampled, recovery_constants
from .solver import RecoveryConfig, recover


def _emit(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_gen(args):
    out = io.ensure_dir(args.out)
    sig_seed, mat_seed = child_seeds(args.seed)
    signal = generate_signal(args.d, args.s, args.amplitude, sig_seed)
    if args.kind == "identity":
        U = np.eye(args.d)
        ensemble = make_ensemble(U, signal)
    else:
        U = generate_matrix(args.m, args.d, args.kind, mat_seed)
        ensemble = make_ensemble(U, signal, args.kind, mat_seed)
    io.write_vector(out / "signal.csv", signal.values)
    io.write_matrix(out / "matrix.csv", ensemble.matrix)
    io.write_vector(out / "y.csv", ensemble.measurements)
    desc = io.ensemble_descriptor(signal, ensemble, seed=args.seed, amplitude=args.amplitude)
    desc.update(signal_seed=sig_seed, matrix_seed=mat_seed if args.kind != "identity" else None)
    if args.kind == "identity":
        desc["kind"] = "identity"
    io.write_json(out / "ensemble.json", desc)
    print(f"wrote signal.csv, matrix.csv, y.csv, ensemble.json to {out}")
    return 0


def _load_problem(args):
    """Matrix, measurements and optional truth from CSV files or a descriptor."""
    desc = io.read_json(args.ensemble) if args.ensemble else None
    truth = io.read_vector(args.truth) if args.truth else None
    if args.matrix:
        U = io.read_matrix(args.matrix)
    elif desc is not None:
        if desc["kind"] == "identity":
            U = np.eye(desc["d"])
        else:
            U = generate_matrix(desc["m"], desc["d"], desc["kind"], desc["matrix_seed"])
    else:
        raise InvalidArgument("give --matrix or --ensemble")
    if args.y:
        y = io.read_vector(args.y)
    elif truth is not None:
        y = U @ truth
    elif desc is not None:
        truth = generate_signal(desc["d"], desc["s"], desc.get("amplitude", "unit"),
                                desc["signal_seed"]).values
        y = U @ truth
    else:
        raise InvalidArgument("give --y, --truth or an --ensemble descriptor")
    return U, y, truth, desc


def _solver_config(args, s, R):
    kw = dict(s=s, R=R, T=args.T, eps=args.eps, gamma_source=args.gamma_source,
              tau_mode=args.tau_mode, tau_plugin=args.tau_plugin,
              theta=args.theta, delta=args.delta, stop_early=args.stop_early)
    if args.gamma is not None:
        kw["gamma"] = args.gamma
    if args.tau_mode == "constant":
        kw["tau_constant"] = args.tau
    if args.tau_mode == "explicit":
        kw["taus"] = tuple(io.read_vector(args.taus))
    return RecoveryConfig(**kw)


def cmd_recover(args):
    U, y, truth, desc = _load_problem(args)
    s = args.s if args.s is not None else (desc or {}).get("s")
    R = args.R if args.R is not None else (desc or {}).get("R")
    if s is None or R is None:
        raise InvalidArgument("--s and --R are required without an ensemble descriptor")
    ensemble = MeasurementEnsemble(U, y)
    config = _solver_config(args, s, R)
    try:
        trace = recover(ensemble, config, truth)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    report = None
    if truth is not None and s >= 1:
        cfg = trace.config
        report = check_trace(trace, truth, U, cfg.gamma, s, R,
                             theta=cfg.theta, delta=cfg.delta)
    io.write_trace(args.out, trace, report)
    final = {"T": trace.config.T, "gamma": trace.config.gamma,
             "final_support": [int(i) for i in np.flatnonzero(trace.final)]}
    if truth is not None:
        final["final_err2"] = float(trace.err2[-1])
    print(json.dumps(final))
    return 0


def cmd_rip(args):
    U = io.read_matrix(args.matrix)
    if args.mode == "exact":
        est = rip_exact(U, args.s, args.budget)
    else:
        est = rip_sampled(U, args.s, args.trials, args.seed)
    _emit(est.to_dict(), args.out)
    return 0


def cmd_verify(args):
    its, taus, _ = io.read_trace(args.trace)
    truth = io.read_vector(args.truth)
    U = io.read_matrix(args.matrix)
    theta, delta, delta3 = args.theta, args.delta, args.delta3
    if args.oracle:
        k = recovery_constants(U, args.s, args.budget)
        theta, delta, delta3 = k.theta_ss, k.delta_s, k.delta_3s
    report = check_trace(its, truth, U, args.gamma, args.s, args.R, taus=taus,
                         theta=theta, delta=delta, delta_3s=delta3)
    _emit(report.to_dict(), args.out)
    return 0 if report.all_ok() else 1


def cmd_sweep(args):
    raw = io.read_json(args.plan)
    if args.seed_base is not None:
        raw["seed_base"] = args.seed_base
    if args.out is not None:
        raw["output_dir"] = args.out
    plan = ExperimentPlan.from_dict(raw)
    if plan.output_dir is None:
        raise InvalidArgument("plan has no output_dir; pass --out")
    result = run_sweep(plan, workers=args.workers)
    for row in result.table:
        print(f"{row['cell']}: success={row['success_fraction']:.3f} "
              f"verdicts={row['verdict_pass_fraction']:.3f} failed={row['failed']}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="sparse-recover", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a signal, matrix and measurements")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--s", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--kind", default="gaussian", choices=["gaussian", "rademacher", "identity"])
    g.add_argument("--amplitude", default="unit", choices=["unit", "gaussian", "uniform"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("recover", help="run the solver and write a trace CSV")
    r.add_argument("--matrix")
    r.add_argument("--ensemble", help="JSON descriptor written by gen")
    r.add_argument("--y")
    r.add_argument("--truth")
    r.add_argument("--s", type=int)
    r.add_argument("--R", type=float)
    r.add_argument("--T", type=int)
    r.add_argument("--eps", type=float)
    r.add_argument("--gamma", type=float)
    r.add_argument("--gamma-source", default="explicit", choices=["explicit", "rip_oracle", "plugin"])
    r.add_argument("--tau-mode", default="geometric", choices=["geometric", "constant", "explicit"])
    r.add_argument("--tau", type=float, help="constant tau")
    r.add_argument("--taus", help="CSV with tau_1..tau_T")
    r.add_argument("--tau-plugin", type=float, default=3.0,
                   help="schedule coefficient as a multiple of gamma when RIP constants are unknown")
    r.add_argument("--theta", type=float)
    r.add_argument("--delta", type=float)
    r.add_argument("--stop-early", action="store_true")
    r.add_argument("--seed", type=int, help="accepted for symmetry with gen; the solver is deterministic")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_recover)

    q = sub.add_parser("rip", help="RIP constants of a matrix")
    q.add_argument("--matrix", required=True)
    q.add_argument("--s", type=int, required=True)
    q.add_argument("--mode", default="exact", choices=["exact", "sampled"])
    q.add_argument("--trials", type=int, default=10000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    q.add_argument("--out")
    q.set_defaults(func=cmd_rip)

    v = sub.add_parser("verify", help="check a trace against the guarantees")
    v.add_argument("--trace", required=True)
    v.add_argument("--truth", required=True)
    v.add_argument("--matrix", required=True)
    v.add_argument("--gamma", type=float, required=True)
    v.add_argument("--s", type=int, required=True)
    v.add_argument("--R", type=float, required=True)
    v.add_argument("--delta", type=float, help="delta_s")
    v.add_argument("--delta3", type=float, help="delta_3s")
    v.add_argument("--theta", type=float, help="theta_ss")
    v.add_argument("--oracle", action="store_true", help="compute the constants exactly")
    v.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="run an experiment plan")
    w.add_argument("--plan", required=True)
    w.add_argument("--seed-base", type=int)
    w.add_argument("--out")
    w.add_argument("--workers", type=int)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
