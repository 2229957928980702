import numpy as np
import pytest

from sparse_recover import kernels

BACKENDS = ["pure"] + (["compiled"] if kernels.compiled is not None else [])
KERNEL_NAMES = ("soft_threshold", "max_deviation_all", "max_deviation_subsets",
                "max_cross_all", "max_cross_pairs")


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route every kernel call through one implementation."""
    impl = kernels.pure if request.param == "pure" else kernels.compiled
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def gaussian(m, d, seed):
    return np.random.default_rng(seed).standard_normal((m, d)) / np.sqrt(m)
