"""Backend selection for the hot kernels.

Two interchangeable kernel implementations exist: numba-jitted loops
(`_kernels_nb`) and vectorized numpy (`_kernels_np`).  The active one is
picked at import time; set ``MINCOPY_DISABLE_NUMBA=1`` (or numba's own
``NUMBA_DISABLE_JIT=1``) to force the numpy path.  Both produce identical
results; `mincopy bench` times them against each other.
"""

import os

_TRUTHY = {"1", "true", "yes", "on"}


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in _TRUTHY


def numba_requested() -> bool:
    return not (_flag("MINCOPY_DISABLE_NUMBA") or _flag("NUMBA_DISABLE_JIT"))


_numba_ok = None


def numba_available() -> bool:
    global _numba_ok
    if _numba_ok is None:
        try:
            import numba  # noqa: F401

            _numba_ok = True
        except ImportError:
            _numba_ok = False
    return _numba_ok


def active_backend() -> str:
    """Name of the backend the kernel dispatcher will use."""
    if numba_requested() and numba_available():
        return "numba"
    return "numpy"


def set_num_threads(n: int) -> None:
    """Cap worker threads for the parallel numba kernels (no-op on numpy)."""
    if n < 1:
        raise ValueError("thread count must be >= 1")
    if numba_available():
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
