"""Numba switch.

Hot kernels are written once in loop form and compiled with ``njit`` unless
``NSC_DISABLE_NUMBA`` is set (or numba is missing), in which case callers use
the vectorised numpy path instead.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

ENABLE_NUMBA = numba is not None and os.environ.get("NSC_DISABLE_NUMBA", "") not in ("1", "true", "yes")


def njit(func):
    """Compile ``func`` with numba when available; otherwise return it as is."""
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)
