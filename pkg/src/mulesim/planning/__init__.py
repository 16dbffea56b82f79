"""Shortest-path kernels with a compiled fast path.

The Cython extension (_speedups) and the pure-Python twin implement the same
algorithm with identical arithmetic and tie-breaking; whichever is available
is selected at import time. Set MULESIM_PURE_PYTHON=1 to force the fallback,
e.g. for benchmarking or debugging.
"""

import os

from . import pure

if os.environ.get("MULESIM_PURE_PYTHON") == "1":
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _speedups as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

astar_path = _impl.astar_path
distance_field = _impl.distance_field

__all__ = ["astar_path", "distance_field", "BACKEND", "pure"]
