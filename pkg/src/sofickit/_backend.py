"""Kernel backend selection.

``SOFICKIT_KERNELS=numpy`` forces the pure-numpy path; anything else (or
unset) uses numba when it imports cleanly.
"""
import os
import warnings

_requested = os.environ.get("SOFICKIT_KERNELS", "numba").strip().lower()

if _requested == "numpy":
    HAVE_NUMBA = False
else:
    try:
        from numba import njit  # noqa: F401
        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - depends on environment
        warnings.warn("numba could not be imported; using the numpy kernels")
        HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"
