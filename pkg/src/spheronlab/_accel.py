"""Backend selection for the compiled kernels.

Numba is used when importable unless ``SPHERONLAB_NUMBA`` is set to a false
value (``0``, ``false``, ``no``, ``off``); the pure-numpy path is then taken.
``SPHERONLAB_THREADS`` caps numba's thread pool.
"""
from __future__ import annotations

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_FALSE = {"0", "false", "no", "off"}


def numba_enabled() -> bool:
    """Return True when the numba kernels should be used for this call."""
    if not HAVE_NUMBA:
        return False
    return os.environ.get("SPHERONLAB_NUMBA", "1").strip().lower() not in _FALSE


def njit(func):
    """``numba.njit(cache=True)`` when numba is present, identity otherwise."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)


def apply_thread_cap() -> int | None:
    """Honour ``SPHERONLAB_THREADS``; returns the cap applied, if any."""
    raw = os.environ.get("SPHERONLAB_THREADS")
    if not raw or not HAVE_NUMBA:
        return None
    cap = max(1, min(int(raw), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(cap)
    return cap


apply_thread_cap()
