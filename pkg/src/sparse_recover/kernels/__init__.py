"""Hot loops behind the solver and the RIP oracles.

The compiled extension is used when it imports; otherwise the numpy
fallback is selected. Set ``SPARSE_RECOVER_PURE=1`` to force the fallback.
"""
import os

from . import _pykernels as pure

compiled = None
if os.environ.get("SPARSE_RECOVER_PURE") != "1":
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

_impl = compiled if compiled is not None else pure
BACKEND = "compiled" if compiled is not None else "pure"

soft_threshold = _impl.soft_threshold
max_deviation_all = _impl.max_deviation_all
max_deviation_subsets = _impl.max_deviation_subsets
max_cross_all = _impl.max_cross_all
max_cross_pairs = _impl.max_cross_pairs

__all__ = [
    "BACKEND",
    "compiled",
    "pure",
    "soft_threshold",
    "max_deviation_all",
    "max_deviation_subsets",
    "max_cross_all",
    "max_cross_pairs",
]
