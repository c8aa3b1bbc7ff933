"""Numba on/off switch for the hot kernels.

Kernels in ``_kernels`` are written as plain numpy/Python loops and compiled
with ``numba.njit`` at import time. Setting the environment variable
``NSBAVOID_NO_NUMBA`` to anything other than ``0`` (or empty) keeps them as
interpreted numpy fallbacks; the numerics are the same, only slower. The
benchmark in ``benchmarks/bench_kernels.py`` compares both paths.
"""

import os


def numba_disabled() -> bool:
    return os.environ.get("NSBAVOID_NO_NUMBA", "0") not in ("", "0")


NUMBA_ENABLED = False
_njit = None
if not numba_disabled():
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False


def maybe_jit(fn):
    """Compile fn with njit(cache=True) when numba is active, else return fn."""
    if NUMBA_ENABLED:
        return _njit(cache=True)(fn)
    return fn
