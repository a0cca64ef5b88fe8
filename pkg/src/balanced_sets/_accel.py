"""Backend selection for the integer kernels.

Set ``BALANCED_SETS_BACKEND=numpy`` to force the vectorized numpy path even
when numba is importable. Any other value (or unset) means numba when present.
"""

import os
import warnings

BACKEND_ENV = "BALANCED_SETS_BACKEND"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _requested() -> str:
    value = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if value not in ("numba", "numpy"):
        warnings.warn(f"{BACKEND_ENV}={value!r} not understood, using numba")
        value = "numba"
    return value


DEFAULT_BACKEND = "numba" if (HAVE_NUMBA and _requested() == "numba") else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise a passthrough decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def resolve_backend(backend=None) -> str:
    if backend is None:
        return DEFAULT_BACKEND
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend
