"""Hot loops of the samplers, dispatched to numba or numpy.

The backend is fixed at import time by ``PRUNESAMPLING_BACKEND`` (see
:mod:`prunesampling._backend`). Chains consume pre-drawn uniforms, one row
per step, so both backends produce identical output for the same input:

* prune: ``n_labels + 1`` uniforms per step (one per label, one for the draw)
* gibbs: ``n`` uniforms per sweep
* metropolis: ``2 n`` uniforms per sweep (proposal, acceptance)
"""
import numpy as np

from .._backend import BACKEND
from . import _numpy
from ._numpy import CAP_EXCEEDED, OK, STUCK, conditional_rows

if BACKEND == "numba":
    from . import _numba as _impl
else:
    _impl = None

__all__ = [
    "BACKEND", "OK", "CAP_EXCEEDED", "STUCK", "blanket_weights", "conditional_rows",
    "enumerate_states", "prune_chain", "gibbs_chain", "metropolis_chain", "uniforms_per_step",
]


def _i64(x):
    return np.ascontiguousarray(x, dtype=np.int64)


def blanket_weights(flat, x, i):
    x = _i64(x)
    if _impl is None:
        return _numpy.blanket_weights(flat, x, int(i))
    return _impl.blanket_weights(flat.card, flat.offset, flat.par_ptr, flat.par_idx,
                                 flat.par_stride, flat.ch_ptr, flat.ch_idx, flat.ch_stride,
                                 flat.values, x, int(i))


def enumerate_states(flat, retained, cap):
    retained = np.ascontiguousarray(retained, dtype=np.bool_)
    if _impl is None:
        return _numpy.enumerate_states(flat, retained, int(cap))
    return _impl.enumerate_states(flat.card, flat.offset, flat.par_ptr, flat.par_idx,
                                  flat.par_stride, retained, int(cap))


def prune_chain(flat, x0, u, cap):
    """Run ``len(u)`` exact prune steps from ``x0``; returns ``(states, status)``."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    if _impl is None:
        return _numpy.prune_chain(flat, _i64(x0), u, int(cap))
    return _impl.prune_chain(flat.card, flat.offset, flat.par_ptr, flat.par_idx,
                             flat.par_stride, flat.values, _i64(x0), u, int(cap))


def gibbs_chain(flat, x0, u):
    """Systematic-scan Gibbs sweeps; returns ``(states, conditionals, status)``.

    ``conditionals[t]`` concatenates, variable by variable, the distribution
    each variable was drawn from during sweep ``t``.
    """
    u = np.ascontiguousarray(u, dtype=np.float64)
    if _impl is None:
        return _numpy.gibbs_chain(flat, _i64(x0), u)
    return _impl.gibbs_chain(flat.card, flat.offset, flat.par_ptr, flat.par_idx,
                             flat.par_stride, flat.ch_ptr, flat.ch_idx, flat.ch_stride,
                             flat.values, _i64(x0), u)


def metropolis_chain(flat, x0, u):
    u = np.ascontiguousarray(u, dtype=np.float64)
    if _impl is None:
        return _numpy.metropolis_chain(flat, _i64(x0), u)
    return _impl.metropolis_chain(flat.card, flat.offset, flat.par_ptr, flat.par_idx,
                                  flat.par_stride, flat.ch_ptr, flat.ch_idx, flat.ch_stride,
                                  flat.values, _i64(x0), u)


def uniforms_per_step(method, flat):
    n = flat.card.shape[0]
    if method == "prune":
        return flat.values.shape[0] + 1
    if method == "gibbs":
        return n
    if method == "metropolis":
        return 2 * n
    raise ValueError(f"unknown method {method!r}")
