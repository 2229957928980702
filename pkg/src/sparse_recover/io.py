"""CSV and JSON formats for matrices, signals and iterate traces.

Numbers are written with ``repr`` (shortest round-trip decimal) so files
read back bit-identical.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .checks import parse_verdict_string, verdict_string
from .exceptions import InvalidArgument

TRACE_COLUMNS = ("t", "tau_t", "err2", "err1", "support_size", "support_union_size", "verdicts")


def _fmt(v):
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v)


def write_matrix(path, A):
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for row in A:
            w.writerow([_fmt(v) for v in row])


def read_matrix(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    if not rows:
        raise InvalidArgument(f"{path}: empty matrix file")
    if len({len(r) for r in rows}) != 1:
        raise InvalidArgument(f"{path}: ragged rows")
    return np.array(rows, dtype=np.float64)


def write_vector(path, v):
    """One value per line."""
    v = np.asarray(v, dtype=np.float64).ravel()
    with open(path, "w") as fh:
        for x in v:
            fh.write(_fmt(x) + "\n")


def read_vector(path) -> np.ndarray:
    """Accepts one value per line or a single comma-separated row."""
    A = read_matrix(path)
    if A.shape[0] != 1 and A.shape[1] != 1:
        raise InvalidArgument(f"{path}: expected a vector, got shape {A.shape}")
    return A.ravel()


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def ensemble_descriptor(signal, ensemble, seed=None, amplitude=None):
    """JSON-ready description {d, s, m, kind, seed, support, R}."""
    desc = {
        "d": signal.dimension,
        "s": signal.sparsity,
        "m": ensemble.m,
        "kind": ensemble.kind,
        "seed": seed if seed is not None else ensemble.rng_seed,
        "support": list(signal.support),
        "R": signal.norm_bound,
    }
    if amplitude is not None:
        desc["amplitude"] = amplitude
    return desc


def write_trace(path, trace, report=None):
    """Trace CSV: the summary columns, then one ``x_i`` column per coordinate.

    Error, union and verdict columns are left out when the trace carries no
    ground truth.
    """
    its = trace.iterates
    d = its.shape[1]
    truth = trace.x_true
    s_true = None if truth is None else frozenset(np.flatnonzero(truth).tolist())
    cols = ["t", "tau_t"]
    if truth is not None:
        cols += ["err2", "err1"]
    cols.append("support_size")
    if truth is not None:
        cols += ["support_union_size", "verdicts"]
    cols += [f"x_{i}" for i in range(d)]
    err2, err1 = trace.err2, trace.err1
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for i, x in enumerate(its):
            supp = frozenset(np.flatnonzero(x).tolist())
            row = [i + 1, _fmt(trace.taus[i]) if i < len(trace.taus) else ""]
            if truth is not None:
                row += [_fmt(err2[i]), _fmt(err1[i])]
            row.append(len(supp))
            if truth is not None:
                row.append(len(supp | s_true))
                row.append(verdict_string(report.verdicts(i)) if report is not None else "")
            row += [_fmt(v) for v in x]
            w.writerow(row)


def read_trace(path):
    """Return (iterates, taus, columns) where columns maps summary names to lists."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    xcols = [i for i, h in enumerate(header) if h.startswith("x_")]
    if not xcols:
        raise InvalidArgument(f"{path}: trace has no iterate columns")
    its = np.array([[float(r[i]) for i in xcols] for r in rows], dtype=np.float64)
    taus = np.array([float(r[header.index("tau_t")]) for r in rows if r[header.index("tau_t")] != ""])
    columns = {}
    for name in TRACE_COLUMNS:
        if name in header:
            j = header.index(name)
            vals = [r[j] for r in rows]
            if name == "verdicts":
                columns[name] = [parse_verdict_string(v) for v in vals]
            elif name in ("t", "support_size", "support_union_size"):
                columns[name] = [int(v) for v in vals]
            else:
                columns[name] = [float(v) if v != "" else None for v in vals]
    return its, taus, columns


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
