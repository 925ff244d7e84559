"""numba-compiled kernels; see ``_numpy`` for the reference semantics."""
import numpy as np
from numba import njit

OK, CAP_EXCEEDED, STUCK = 0, 1, 2

_jit = njit(cache=True, nogil=True)


@_jit
def _config(par_ptr, par_idx, par_stride, x, i):
    cfg = 0
    for k in range(par_ptr[i], par_ptr[i + 1]):
        cfg += x[par_idx[k]] * par_stride[k]
    return cfg


@_jit
def _weights(card, offset, par_ptr, par_idx, par_stride, ch_ptr, ch_idx, ch_stride,
             values, x, i, w):
    ci = card[i]
    base = offset[i] + _config(par_ptr, par_idx, par_stride, x, i) * ci
    for s in range(ci):
        w[s] = values[base + s]
    for k in range(ch_ptr[i], ch_ptr[i + 1]):
        c = ch_idx[k]
        st = ch_stride[k]
        cfg = _config(par_ptr, par_idx, par_stride, x, c)
        for s in range(ci):
            w[s] *= values[offset[c] + (cfg + (s - x[i]) * st) * card[c] + x[c]]


@_jit
def _weight_one(card, offset, par_ptr, par_idx, par_stride, ch_ptr, ch_idx, ch_stride,
                values, x, i, s):
    ci = card[i]
    w = values[offset[i] + _config(par_ptr, par_idx, par_stride, x, i) * ci + s]
    for k in range(ch_ptr[i], ch_ptr[i + 1]):
        c = ch_idx[k]
        cfg = _config(par_ptr, par_idx, par_stride, x, c)
        w *= values[offset[c] + (cfg + (s - x[i]) * ch_stride[k]) * card[c] + x[c]]
    return w


@_jit
def blanket_weights(card, offset, par_ptr, par_idx, par_stride, ch_ptr, ch_idx, ch_stride,
                    values, x, i):
    w = np.empty(card[i], dtype=np.float64)
    _weights(card, offset, par_ptr, par_idx, par_stride, ch_ptr, ch_idx, ch_stride,
             values, x, i, w)
    return w


@_jit
def enumerate_states(card, offset, par_ptr, par_idx, par_stride, retained, cap):
    n = card.shape[0]
    buf = np.empty((16, n), dtype=np.int64)
    if n == 0:
        return buf[:1].copy(), True
    m = 0
    x = np.zeros(n, dtype=np.int64)
    nxt = np.zeros(n, dtype=np.int64)
    base = np.zeros(n, dtype=np.int64)
    level = np.zeros(n, dtype=np.int64)
    base[0] = offset[0]
    i = 0
    while i >= 0:
        s = nxt[i]
        found = -1
        while s < card[i]:
            if retained[base[i] + s]:
                found = s
                break
            s += 1
        if found < 0:
            i -= 1
            continue
        x[i] = found
        nxt[i] = found + 1
        level[i] += 1
        if level[i] > cap:
            return buf[:0].copy(), False
        if i == n - 1:
            if m == buf.shape[0]:
                bigger = np.empty((2 * m, n), dtype=np.int64)
                bigger[:m] = buf
                buf = bigger
            buf[m, :] = x
            m += 1
        else:
            i += 1
            base[i] = offset[i] + _config(par_ptr, par_idx, par_stride, x, i) * card[i]
            nxt[i] = 0
    return buf[:m].copy(), True


@_jit
def prune_chain(card, offset, par_ptr, par_idx, par_stride, values, x0, u, cap):
    steps = u.shape[0]
    n = x0.shape[0]
    n_labels = values.shape[0]
    out = np.empty((steps, n), dtype=np.int64)
    retained = np.empty(n_labels, dtype=np.bool_)
    x = x0.copy()
    for t in range(steps):
        for lab in range(n_labels):
            retained[lab] = u[t, lab] < values[lab]
        for i in range(n):
            cfg = _config(par_ptr, par_idx, par_stride, x, i)
            retained[offset[i] + cfg * card[i] + x[i]] = True
        states, ok = enumerate_states(card, offset, par_ptr, par_idx, par_stride, retained, cap)
        if not ok:
            return out[:t].copy(), CAP_EXCEEDED
        m = states.shape[0]
        k = int(u[t, n_labels] * m)
        if k >= m:
            k = m - 1
        for i in range(n):
            x[i] = states[k, i]
            out[t, i] = x[i]
    return out, OK


@_jit
def gibbs_chain(card, offset, par_ptr, par_idx, par_stride, ch_ptr, ch_idx, ch_stride,
                values, x0, u):
    steps = u.shape[0]
    n = x0.shape[0]
    cond_off = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        cond_off[i + 1] = cond_off[i] + card[i]
    out = np.empty((steps, n), dtype=np.int64)
    conds = np.zeros((steps, cond_off[n]), dtype=np.float64)
    w = np.empty(card.max() if n else 1, dtype=np.float64)
    cum = np.empty_like(w)
    x = x0.copy()
    for t in range(steps):
        for i in range(n):
            ci = card[i]
            _weights(card, offset, par_ptr, par_idx, par_stride, ch_ptr, ch_idx, ch_stride,
                     values, x, i, w)
            acc = 0.0
            for s in range(ci):
                acc += w[s]
                cum[s] = acc
            total = acc
            if not total > 0:
                return out[:t].copy(), conds[:t].copy(), STUCK
            thr = u[t, i] * total
            k = -1
            for s in range(ci):
                if thr < cum[s]:
                    k = s
                    break
            if k < 0:
                for s in range(ci):
                    if w[s] > 0:
                        k = s
            for s in range(ci):
                conds[t, cond_off[i] + s] = w[s] / total
            x[i] = k
        for i in range(n):
            out[t, i] = x[i]
    return out, conds, OK


@_jit
def metropolis_chain(card, offset, par_ptr, par_idx, par_stride, ch_ptr, ch_idx, ch_stride,
                     values, x0, u):
    steps = u.shape[0]
    n = x0.shape[0]
    out = np.empty((steps, n), dtype=np.int64)
    x = x0.copy()
    for t in range(steps):
        for i in range(n):
            ci = card[i]
            if ci < 2:
                continue
            j = int(u[t, 2 * i] * (ci - 1))
            if j >= ci - 1:
                j = ci - 2
            if j >= x[i]:
                j += 1
            w_new = _weight_one(card, offset, par_ptr, par_idx, par_stride, ch_ptr, ch_idx,
                                ch_stride, values, x, i, j)
            if w_new > 0:
                w_cur = _weight_one(card, offset, par_ptr, par_idx, par_stride, ch_ptr,
                                    ch_idx, ch_stride, values, x, i, x[i])
                if u[t, 2 * i + 1] < w_new / w_cur:
                    x[i] = j
        for i in range(n):
            out[t, i] = x[i]
    return out, OK
