import numpy as np
import pytest

from sparse_recover import kernels
from sparse_recover.kernels import pure

from .conftest import gaussian

compiled = kernels.compiled
needs_ext = pytest.mark.skipif(compiled is None, reason="extension not built")


def brute_deviation(G, s):
    from itertools import combinations

    best = 0.0
    for T in combinations(range(G.shape[0]), s):
        lam = np.linalg.eigvalsh(G[np.ix_(T, T)] - np.eye(s))
        best = max(best, np.abs(lam).max())
    return best


@needs_ext
@pytest.mark.parametrize("s", [1, 2, 3, 4, 5, 7])
def test_deviation_backends_agree(s):
    U = gaussian(12, 14, seed=s)
    G = np.ascontiguousarray(U.T @ U)
    a, na = compiled.max_deviation_all(G, s)
    b, nb = pure.max_deviation_all(G, s)
    assert na == nb
    assert a == pytest.approx(b, abs=1e-13)
    assert a == pytest.approx(brute_deviation(G, s), abs=1e-13)


@needs_ext
@pytest.mark.parametrize("s", [1, 2, 3])
def test_cross_backends_agree(s):
    U = gaussian(10, 11, seed=40 + s)
    G = np.ascontiguousarray(U.T @ U)
    a, na = compiled.max_cross_all(G, s)
    b, nb = pure.max_cross_all(G, s)
    assert na == nb
    assert a == pytest.approx(b, abs=1e-13)


@needs_ext
def test_spectral_radius_on_hard_spectra():
    # clustered and negative-dominated spectra through the deviation kernel
    rng = np.random.default_rng(0)
    for n in (3, 5, 8, 12):
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        for lam in (np.full(n, 0.3), np.linspace(-2.0, 0.5, n), np.r_[1e-9, np.zeros(n - 1)]):
            A = (Q * lam) @ Q.T + np.eye(n)
            G = np.ascontiguousarray((A + A.T) / 2)
            val, _ = compiled.max_deviation_all(G, n)
            assert val == pytest.approx(np.abs(lam).max(), abs=1e-13)


def test_subset_kernels_match_enumeration(backend):
    U = gaussian(9, 10, seed=1)
    G = np.ascontiguousarray(U.T @ U)
    from itertools import combinations

    idx = np.array(list(combinations(range(10), 3)), dtype=np.int64)
    full, _ = kernels.max_deviation_all(G, 3)
    assert kernels.max_deviation_subsets(G, idx) == pytest.approx(full, abs=1e-14)
    assert kernels.max_deviation_subsets(G, idx[:5]) <= full + 1e-14


@needs_ext
def test_soft_threshold_bitwise(rng):
    v = rng.standard_normal(1000) * 3
    v[::7] = 0.5
    for thr in (0.0, 0.5, 1.3):
        assert compiled.soft_threshold(v, thr).tobytes() == pure.soft_threshold(v, thr).tobytes()


def test_backend_name():
    assert kernels.BACKEND in ("compiled", "pure")
