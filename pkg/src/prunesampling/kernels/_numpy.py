"""Vectorized numpy kernels.

Each function mirrors its counterpart in ``_numba`` operation for operation
(same multiplication order, sequential cumulative sums) so that both
backends turn the same uniforms into the same chains.
"""
import numpy as np

OK, CAP_EXCEEDED, STUCK = 0, 1, 2


def _config(flat, x, i):
    lo, hi = flat.par_ptr[i], flat.par_ptr[i + 1]
    if lo == hi:
        return 0
    return int(x[flat.par_idx[lo:hi]] @ flat.par_stride[lo:hi])


def blanket_weights(flat, x, i):
    """Unnormalized ``P(X_i = s | blanket)`` for every state ``s``."""
    ci = flat.card[i]
    s = np.arange(ci)
    w = flat.values[flat.offset[i] + _config(flat, x, i) * ci + s]
    for k in range(flat.ch_ptr[i], flat.ch_ptr[i + 1]):
        c = flat.ch_idx[k]
        cfg = _config(flat, x, c) + (s - x[i]) * flat.ch_stride[k]
        w = w * flat.values[flat.offset[c] + cfg * flat.card[c] + x[c]]
    return w


def conditional_rows(flat, states, i):
    """Normalized blanket conditionals of variable ``i`` for each row of ``states``.

    Rows whose blanket product is zero come back as NaN.
    """
    states = np.asarray(states, dtype=np.int64)
    ci = flat.card[i]
    s = np.arange(ci)[None, :]

    def cfg_rows(v):
        lo, hi = flat.par_ptr[v], flat.par_ptr[v + 1]
        if lo == hi:
            return np.zeros(states.shape[0], dtype=np.int64)
        return states[:, flat.par_idx[lo:hi]] @ flat.par_stride[lo:hi]

    w = flat.values[flat.offset[i] + cfg_rows(i)[:, None] * ci + s]
    xi = states[:, i][:, None]
    for k in range(flat.ch_ptr[i], flat.ch_ptr[i + 1]):
        c = flat.ch_idx[k]
        cfg = cfg_rows(c)[:, None] + (s - xi) * flat.ch_stride[k]
        w = w * flat.values[flat.offset[c] + cfg * flat.card[c] + states[:, c][:, None]]
    total = np.cumsum(w, axis=1)[:, -1:]
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(total > 0, w / total, np.nan)


def enumerate_states(flat, retained, cap):
    """All full states using only retained labels, in lexicographic order.

    Returns ``(states, ok)``; ``ok`` is False when more than ``cap`` partial
    states exist at some depth.
    """
    n = flat.card.shape[0]
    frontier = np.zeros((1, 0), dtype=np.int64)
    for i in range(n):
        ci = flat.card[i]
        lo, hi = flat.par_ptr[i], flat.par_ptr[i + 1]
        if lo == hi:
            cfg = np.zeros(frontier.shape[0], dtype=np.int64)
        else:
            cfg = frontier[:, flat.par_idx[lo:hi]] @ flat.par_stride[lo:hi]
        allowed = retained[flat.offset[i] + cfg[:, None] * ci + np.arange(ci)[None, :]]
        rows, vals = np.nonzero(allowed)
        if rows.size > cap:
            return frontier[:0], False
        frontier = np.column_stack([frontier[rows], vals])
        if rows.size == 0:
            break
    return frontier.reshape(-1, n), True


def _label_ids(flat, x):
    n = flat.card.shape[0]
    cfg = np.zeros(n, dtype=np.int64)
    for i in range(n):
        cfg[i] = _config(flat, x, i)
    return flat.offset[:n] + cfg * flat.card + x


def prune_chain(flat, x0, u, cap):
    steps = u.shape[0]
    n_labels = flat.values.shape[0]
    out = np.empty((steps, x0.shape[0]), dtype=np.int64)
    x = x0.copy()
    for t in range(steps):
        retained = u[t, :n_labels] < flat.values
        retained[_label_ids(flat, x)] = True
        states, ok = enumerate_states(flat, retained, cap)
        if not ok:
            return out[:t], CAP_EXCEEDED
        m = states.shape[0]
        k = int(u[t, n_labels] * m)
        if k >= m:
            k = m - 1
        x = states[k].copy()
        out[t] = x
    return out, OK


def _pick(w, u):
    cum = np.cumsum(w)
    total = cum[-1]
    if not total > 0:
        return -1, total
    k = int(np.argmax(u * total < cum))
    if not u * total < cum[k]:
        k = int(np.flatnonzero(w > 0)[-1])
    return k, total


def gibbs_chain(flat, x0, u):
    steps, n = u.shape[0], x0.shape[0]
    cond_off = np.concatenate([[0], np.cumsum(flat.card)])
    out = np.empty((steps, n), dtype=np.int64)
    conds = np.zeros((steps, cond_off[-1]), dtype=np.float64)
    x = x0.copy()
    for t in range(steps):
        for i in range(n):
            w = blanket_weights(flat, x, i)
            k, total = _pick(w, u[t, i])
            if k < 0:
                return out[:t], conds[:t], STUCK
            conds[t, cond_off[i]:cond_off[i + 1]] = w / total
            x[i] = k
        out[t] = x
    return out, conds, OK


def metropolis_chain(flat, x0, u):
    steps, n = u.shape[0], x0.shape[0]
    out = np.empty((steps, n), dtype=np.int64)
    x = x0.copy()
    for t in range(steps):
        for i in range(n):
            ci = flat.card[i]
            if ci < 2:
                continue
            j = int(u[t, 2 * i] * (ci - 1))
            if j >= ci - 1:
                j = ci - 2
            if j >= x[i]:
                j += 1
            w = blanket_weights(flat, x, i)
            if w[j] > 0 and u[t, 2 * i + 1] < w[j] / w[x[i]]:
                x[i] = j
        out[t] = x
    return out, OK
