"""Optional numba acceleration.

Set ``SYMSPEC_NUMBA=0`` to force the pure numpy/Python kernels. The flag is
read once at import time.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and os.environ.get("SYMSPEC_NUMBA", "1").strip() not in ("0", "false", "no")


def njit(func):
    """``numba.njit(cache=True)`` when enabled, identity otherwise."""
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func
