"""Numba acceleration switch.

Kernels in this package are plain Python functions written so that the same
source runs under ``numba.njit`` (scalar inputs) and under numpy (array
inputs, coordinate-major).  Set ``NHPOISSON_DISABLE_NUMBA=1`` to force the
pure-numpy path; it is also used when numba cannot be imported.
"""
import os

import numpy as np

ENV_FLAG = "NHPOISSON_DISABLE_NUMBA"


def _numba_requested():
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


try:
    if not _numba_requested():
        raise ImportError("disabled by " + ENV_FLAG)
    import numba
    from numba.extending import overload, register_jitable
    USE_NUMBA = True
except ImportError:
    numba = None
    USE_NUMBA = False


def jit(fn):
    """Compile ``fn`` with ``numba.njit`` when acceleration is on, else return it."""
    if USE_NUMBA:
        return numba.njit(cache=False)(fn)
    return fn


def kernel(fn):
    """Mark a helper callable from both Python and compiled kernels."""
    if USE_NUMBA:
        return register_jitable(fn)
    return fn


def safe_div(a, b):
    """``a / b`` with the convention ``0 / anything == 0``.

    Used for removable singularities at the singular equilibria (for example
    ``sigma3**2 / (1 - sigma1**2)`` at ``sigma1 = 1, sigma3 = 0``).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros(np.broadcast(a, b).shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        np.divide(a, b, out=out, where=(a != 0.0))
    if out.ndim == 0:
        return float(out)
    return out


if USE_NUMBA:
    @overload(safe_div)
    def _safe_div_scalar(a, b):
        def impl(a, b):
            if a == 0.0:
                return 0.0
            return a / b
        return impl
