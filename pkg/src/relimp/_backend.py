"""Kernel backend selection.

``RELIMP_BACKEND=numpy`` forces the pure-numpy kernels; anything else (or
unset) uses numba when it imports cleanly. The choice is made once, at
import time.
"""

import os

_requested = os.environ.get("RELIMP_BACKEND", "numba").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is optional
    _numba = None

if _requested not in ("numba", "numpy"):
    raise ValueError(f"RELIMP_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

BACKEND = "numba" if (_requested == "numba" and _numba is not None) else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` with ``cache=True`` by default; identity without numba."""
    if _numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)


def get_kernels(backend=None):
    """Return the kernel module for ``backend`` (default: the active one)."""
    name = backend or BACKEND
    if name == "numba":
        if _numba is None:
            raise RuntimeError("numba backend requested but numba is not installed")
        from . import _kernels_numba as mod
    elif name == "numpy":
        from . import _kernels_numpy as mod
    else:
        raise ValueError(f"unknown backend {name!r}")
    return mod
