"""Backend selection for the hot numeric kernels.

Every kernel in :mod:`diracwidth.kernels` exists twice: a loop version
compiled with numba and a vectorized pure-numpy version. Setting
``DIRACWIDTH_PURE_NUMPY=1`` in the environment (read once, at import) forces
the numpy path; it is also used automatically when numba cannot be imported.
"""
import os

_FLAG = "DIRACWIDTH_PURE_NUMPY"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get(_FLAG, "").strip().lower() in ("", "0", "false", "no")


def njit(*args, **kwargs):
    """``numba.njit`` with caching, or a passthrough decorator without numba."""
    bare = len(args) == 1 and callable(args[0]) and not kwargs
    if not HAVE_NUMBA:
        return args[0] if bare else (lambda fn: fn)
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def pick(numba_impl, numpy_impl):
    """Return the implementation matching the active backend."""
    return numba_impl if USE_NUMBA else numpy_impl
