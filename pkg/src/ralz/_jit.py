"""Kernel compilation switch.

Hot loops are written once in the numba-compatible subset of Python.  With
``RALZ_PURE_NUMPY=1`` in the environment (or numba missing) they run as
plain Python over numpy arrays, and the modules that have a vectorized
numpy formulation (decoding, deterministic batch access) switch to it.
"""

import os

_flag = os.environ.get("RALZ_PURE_NUMPY", "0").strip().lower()
USE_NUMBA = _flag not in ("1", "true", "yes", "on")

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def jit(fn):
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    fn.py_func = fn
    return fn


BACKEND = "numba" if USE_NUMBA else "numpy"
