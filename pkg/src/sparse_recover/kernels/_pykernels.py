"""Pure numpy versions of the compiled kernels.

Subsets are generated with :func:`itertools.combinations` in the same
lexicographic order as the compiled enumerator and evaluated in batches
with stacked ``eigvalsh``/``svd`` calls.
"""
from itertools import combinations, islice

import numpy as np

_CHUNK = 8192


def soft_threshold(v, thr):
    v = np.asarray(v, dtype=np.float64)
    # same branch structure as the compiled kernel, so zeros come out as +0.0
    return np.where(v > thr, v - thr, np.where(v < -thr, v + thr, 0.0))


def _batched(iterable, n):
    it = iter(iterable)
    while True:
        chunk = list(islice(it, n))
        if not chunk:
            return
        yield chunk


def max_deviation_subsets(G, idx):
    idx = np.asarray(idx, dtype=np.int64)
    if idx.shape[0] == 0:
        return 0.0
    s = idx.shape[1]
    eye = np.eye(s)
    best = 0.0
    for start in range(0, idx.shape[0], _CHUNK):
        rows = idx[start:start + _CHUNK]
        blocks = G[rows[:, :, None], rows[:, None, :]] - eye
        lam = np.linalg.eigvalsh(blocks)
        best = max(best, float(np.abs(lam).max()))
    return best


def max_deviation_all(G, s):
    d = G.shape[0]
    best, count = 0.0, 0
    for chunk in _batched(combinations(range(d), s), _CHUNK):
        idx = np.array(chunk, dtype=np.int64)
        best = max(best, max_deviation_subsets(G, idx))
        count += len(chunk)
    return best, count


def max_cross_pairs(G, ia, ib):
    ia = np.asarray(ia, dtype=np.int64)
    ib = np.asarray(ib, dtype=np.int64)
    if ia.shape[0] == 0:
        return 0.0
    best = 0.0
    for start in range(0, ia.shape[0], _CHUNK):
        a = ia[start:start + _CHUNK]
        b = ib[start:start + _CHUNK]
        blocks = G[a[:, :, None], b[:, None, :]]
        sv = np.linalg.svd(blocks, compute_uv=False)
        best = max(best, float(sv[:, 0].max()))
    return best


def _disjoint_pairs(d, s):
    for a in combinations(range(d), s):
        taken = set(a)
        rest = [j for j in range(a[0] + 1, d) if j not in taken]
        for b in combinations(rest, s):
            yield a, b


def max_cross_all(G, s):
    d = G.shape[0]
    best, count = 0.0, 0
    for chunk in _batched(_disjoint_pairs(d, s), _CHUNK):
        ia = np.array([p[0] for p in chunk], dtype=np.int64)
        ib = np.array([p[1] for p in chunk], dtype=np.int64)
        best = max(best, max_cross_pairs(G, ia, ib))
        count += len(chunk)
    return best, count
