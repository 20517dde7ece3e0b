"""Optional numba acceleration.

Set ``ENTCRIT_BACKEND=numpy`` to force the pure-numpy code path. Any other
value (or unset) uses numba when it imports cleanly. Compiled kernels
release the GIL so sweeps can run them on a thread pool.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get("ENTCRIT_BACKEND", "numba").strip().lower() != "numpy"


def jit(fn):
    """Compile ``fn`` with numba in nopython mode, or return it unchanged."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def jit_nocache(fn):
    # functions taking other jitted functions as arguments cannot be cached
    if not HAVE_NUMBA:
        return fn
    return numba.njit(nogil=True)(fn)


def jit_fast(fn):
    """Like :func:`jit` with fastmath; only for reductions whose result is
    compared at coarse tolerance (the brute-force grid)."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True, fastmath=True)(fn)
