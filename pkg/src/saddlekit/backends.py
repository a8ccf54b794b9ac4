"""Backend selection for the hot kernels.

The chain-instance evaluators and the full-run bench drivers exist in two
forms: numba-jitted scalar loops (fast, default when numba is importable)
and plain numpy (fallback). Selection:

    SADDLEKIT_BACKEND=numba   force jitted kernels (falls back with a
                              warning if numba is missing)
    SADDLEKIT_BACKEND=numpy   force the numpy path
    unset                     numba when available, else numpy

The choice is made once at import time; everything downstream asks
``use_numba()`` / ``backend_name()``.
"""
import os
import warnings

try:
    import numba  # noqa: F401
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

_requested = os.environ.get("SADDLEKIT_BACKEND", "").strip().lower()

if _requested in ("", "auto"):
    _use_numba = HAS_NUMBA
elif _requested in ("numpy", "python"):
    _use_numba = False
elif _requested in ("numba", "jit"):
    if not HAS_NUMBA:
        warnings.warn("SADDLEKIT_BACKEND=numba requested but numba is not "
                      "importable; using the numpy path")
    _use_numba = HAS_NUMBA
else:
    raise ValueError(f"unknown SADDLEKIT_BACKEND={_requested!r}; "
                     "expected 'numba', 'numpy', or unset")


def use_numba():
    return _use_numba


def backend_name():
    return "numba" if _use_numba else "numpy"


if _use_numba:
    from numba import njit
else:
    def njit(*args, **kwargs):
        """Identity decorator so kernel sources import cleanly without numba."""
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn
        return wrap
