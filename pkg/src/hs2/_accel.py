"""Numba switch.

Hot kernels in :mod:`hs2.kernels` come in two flavours: a loop version
compiled with numba and a vectorised pure-numpy version. ``HS2_NUMBA=0`` in
the environment (read once, at import) routes every call to the numpy one.
"""

import os

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("HS2_NUMBA", "1").strip().lower() not in (
    "0", "false", "no", "off")


def jit(func):
    """Compile ``func`` in nopython mode, or return None without numba."""
    if not HAVE_NUMBA:
        return None
    return numba.njit(cache=True, nogil=True)(func)
