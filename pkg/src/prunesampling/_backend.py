"""Kernel backend selection.

Set ``PRUNESAMPLING_BACKEND=numpy`` to force the vectorized numpy kernels;
the default is ``numba`` whenever it can be imported.
"""
import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _resolve():
    requested = os.environ.get("PRUNESAMPLING_BACKEND", "").strip().lower()
    if requested in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if requested not in ("numba", "numpy"):
        raise RuntimeError(f"unknown PRUNESAMPLING_BACKEND {requested!r}")
    if requested == "numba" and not HAVE_NUMBA:
        raise RuntimeError("PRUNESAMPLING_BACKEND=numba but numba is not installed")
    return requested


BACKEND = _resolve()
