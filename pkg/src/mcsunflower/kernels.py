"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
reference implementation takes over.  Setting ``MCSUNFLOWER_PURE_PYTHON=1``
forces the fallback (handy for benchmarking and for testing both paths).
"""
import os

from . import _pykernels

if os.environ.get("MCSUNFLOWER_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND

find_sunflower = _impl.find_sunflower
best_completion = _impl.best_completion
good_pair_count = _impl.good_pair_count
pq_enumeration_total = _impl.pq_enumeration_total
count_assignments = _impl.count_assignments


def available_backends():
    """Map backend name to module for every backend importable here."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
