"""Backend switch for the hot numeric kernels.

Kernels are compiled with numba when it is importable. Setting
``SUPERLINEAR_DISABLE_NUMBA=1`` forces the pure-numpy path, which runs the
same kernel bodies as plain Python (or a vectorized numpy twin where one
exists).
"""
import os
import warnings

_FLAG = "SUPERLINEAR_DISABLE_NUMBA"


def _disabled():
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    if _disabled():
        raise ImportError("numba disabled via " + _FLAG)
    import numba

    # parallel kernels fall back to the OpenMP/workqueue layers on their own
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    USE_NUMBA = True
except ImportError:
    numba = None
    USE_NUMBA = False

BACKEND = "numba" if USE_NUMBA else "numpy"


def jit(func=None, **options):
    """``numba.njit(cache=True)`` when available, identity otherwise."""

    def wrap(f):
        if USE_NUMBA:
            return numba.njit(cache=True, **options)(f)
        return f

    if func is not None:
        return wrap(func)
    return wrap


if USE_NUMBA:
    prange = numba.prange
else:
    prange = range
