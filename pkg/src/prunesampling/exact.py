"""Exact reference computations.

Brute-force enumeration, variable-elimination marginals and the exhaustive
prune-sampling transition kernel. Everything here is exponential in some
quantity and guarded by an explicit cap.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import CapExceededError, IntractableError, ZeroEvidenceError
from .network import Network, joint_probability, reduce_evidence

STATE_CAP = 10**6
SUBSET_CAP = 2**18
MAX_FACTOR_SIZE = 2**24


@dataclass(frozen=True, eq=False)
class MarginalTable:
    """One-variable marginals, indexed by variable id or name."""

    net: Network
    probs: tuple

    def __getitem__(self, var) -> np.ndarray:
        return self.probs[self.net.index(var)]

    def __len__(self):
        return len(self.probs)

    def rows(self):
        """``(variable, state, probability)`` triples in network order."""
        for var, p in zip(self.net.variables, self.probs):
            for state, value in zip(var.states, p):
                yield var.name, state, float(value)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    states: np.ndarray  # (m, n) feasible states, row i <-> matrix row/col i
    matrix: np.ndarray  # (m, m), matrix[i, j] = R(states[i] -> states[j])

    def index(self, x) -> int:
        hit = np.flatnonzero((self.states == np.asarray(x)).all(axis=1))
        if hit.size == 0:
            raise KeyError(tuple(int(v) for v in x))
        return int(hit[0])

    def __call__(self, x, y) -> float:
        return float(self.matrix[self.index(x), self.index(y)])


# -- enumeration -------------------------------------------------------------


def enumerate_feasible(net: Network, cap: int = STATE_CAP):
    """All states with positive probability and their unnormalized probabilities.

    Depth-first in topological order, abandoning a branch as soon as it
    selects a zero CPT entry.
    """
    flat = net.flat
    values = flat.values
    x = [0] * net.n
    out = []

    def extend(i, p):
        if i == net.n:
            if len(out) >= cap:
                raise CapExceededError(f"state-space too large: more than {cap} feasible states")
            out.append((tuple(x), p))
            return
        cfg = net.parent_config(x, i)
        base = int(flat.offset[i]) + cfg * int(flat.card[i])
        for s in range(int(flat.card[i])):
            c = float(values[base + s])
            if c > 0:
                x[i] = s
                extend(i + 1, p * c)
        x[i] = 0

    extend(0, 1.0)
    return out


def all_states(net: Network):
    return itertools.product(*(range(v.cardinality) for v in net.variables))


def brute_force_marginals(net: Network, evidence: Mapping | None = None) -> MarginalTable:
    """Marginals by summing the joint over every full assignment."""
    ev = net.assignment(evidence or {})
    acc = [np.zeros(v.cardinality) for v in net.variables]
    for x in all_states(net):
        if any(x[k] != s for k, s in ev.items()):
            continue
        p = joint_probability(net, x)
        for i, s in enumerate(x):
            acc[i][s] += p
    z = acc[0].sum() if acc else 1.0
    if not z > 0:
        raise ZeroEvidenceError("evidence has probability zero")
    return MarginalTable(net, tuple(a / z for a in acc))


# -- variable elimination ----------------------------------------------------


class _Factor:
    __slots__ = ("vars", "table")

    def __init__(self, vars_, table):
        self.vars = tuple(vars_)
        self.table = table


def _aligned(f, union, card):
    order = sorted(range(len(f.vars)), key=lambda k: union.index(f.vars[k]))
    t = np.transpose(f.table, order)
    present = {f.vars[k] for k in order}
    return t.reshape([card[v] if v in present else 1 for v in union])


def _product(factors, card, limit):
    union = sorted({v for f in factors for v in f.vars})
    size = int(np.prod([card[v] for v in union], dtype=np.float64)) if union else 1
    if size > limit:
        raise IntractableError(f"variable elimination needs a factor of {size} entries")
    out = np.ones([card[v] for v in union])
    for f in factors:
        out = out * _aligned(f, union, card)
    return _Factor(union, out)


def _eliminate(factors, keep, card, limit):
    factors = list(factors)
    remaining = {v for f in factors for v in f.vars} - {keep}
    while remaining:
        nbrs = {v: set() for v in remaining}
        for f in factors:
            for v in f.vars:
                if v in nbrs:
                    nbrs[v].update(f.vars)
        v = min(remaining, key=lambda u: (len(nbrs[u] - {u}), u))
        touching = [f for f in factors if v in f.vars]
        factors = [f for f in factors if v not in f.vars]
        prod = _product(touching, card, limit)
        axis = prod.vars.index(v)
        factors.append(_Factor(prod.vars[:axis] + prod.vars[axis + 1:], prod.table.sum(axis=axis)))
        remaining.discard(v)
    final = _product(factors, card, limit)
    if final.vars == ():
        return np.full(card[keep], float(final.table))
    return final.table


def exact_marginals(net: Network, evidence: Mapping | None = None,
                    max_factor_size: int = MAX_FACTOR_SIZE) -> MarginalTable:
    """Posterior one-variable marginals by variable elimination (min-degree order).

    For each query only the ancestors of the query and evidence variables
    take part; other variables sum out to one.
    """
    reduced = reduce_evidence(net, evidence or {})
    card = [v.cardinality for v in reduced.variables]
    cpt_factors = []
    for var, cpt in zip(reduced.variables, reduced.cpts):
        shape = [card[p] for p in var.parents] + [var.cardinality]
        cpt_factors.append(_Factor(var.parents + (var.id,), cpt.columns.reshape(shape)))
    ancestors = []
    for var in reduced.variables:
        anc = {var.id}
        for p in var.parents:
            anc |= ancestors[p]
        ancestors.append(anc)
    ev_anc = set().union(*(ancestors[k] for k in reduced.evidence)) if reduced.evidence else set()
    probs = []
    for q in range(reduced.n):
        relevant = sorted(ancestors[q] | ev_anc)
        vec = _eliminate([cpt_factors[v] for v in relevant], q, card, max_factor_size)
        z = vec.sum()
        if not z > 0:
            raise ZeroEvidenceError("evidence has probability zero")
        probs.append(vec / z)
    return MarginalTable(net, tuple(probs))


# -- prune-sampling transition kernel ----------------------------------------


def _transition_rows(net: Network, feasible: np.ndarray, sources, subset_cap: int):
    """Exact ``R(x -> .)`` over ``feasible`` for each ``x`` in ``sources``.

    Every label outside ``C_x`` is pruned or retained; a retained-set outcome
    has weight ``prod(1 - c) over pruned * prod(c) over retained \\ C_x`` and
    moves to each state of its induced set with probability ``1/|S|``. Labels
    with ``c = 0`` or ``c = 1`` contribute one outcome of weight 1, so only the
    remaining labels are enumerated, as bitmasks.
    """
    values = net.flat.values
    ids = np.array([net.label_ids_of(y) for y in feasible])
    rows = []
    for x in sources:
        cx = net.label_ids_of(x)
        free = np.flatnonzero((values > 0) & (values < 1))
        free = free[~np.isin(free, cx)]
        n_free = free.size
        if 2**n_free > subset_cap:
            raise CapExceededError(
                f"{n_free} prunable labels exceed the oracle limit of {subset_cap} subsets"
            )
        bit = np.full(values.size, -1, dtype=np.int64)
        bit[free] = np.arange(n_free)
        required = np.zeros(len(feasible), dtype=np.int64)
        for k, lab in enumerate(ids):
            b = bit[lab]
            required[k] = np.bitwise_or.reduce(np.left_shift(1, b[b >= 0])) if (b >= 0).any() else 0
        row = np.zeros(len(feasible))
        block = 1 << min(n_free, 16)
        c = values[free]
        for start in range(0, 1 << n_free, block):
            masks = np.arange(start, start + block, dtype=np.int64)
            w = np.ones(block)
            for j in range(n_free):
                on = ((masks >> j) & 1).astype(bool)
                w *= np.where(on, c[j], 1.0 - c[j])
            member = (masks[:, None] & required[None, :]) == required[None, :]
            size = member.sum(axis=1)
            row += (w / size) @ member
        rows.append(row)
    return np.array(rows)


def _feasible_array(net, cap):
    states = enumerate_feasible(net, cap)
    return np.array([s for s, _ in states], dtype=np.int64).reshape(-1, net.n), np.array(
        [p for _, p in states]
    )


def prune_transition_prob(net: Network, x, y, cap: int = STATE_CAP,
                          subset_cap: int = SUBSET_CAP) -> float:
    """Exact probability that one prune step moves from ``x`` to ``y``."""
    from .errors import ContractError
    from .network import is_feasible

    x = net.full_state(x)
    y = net.full_state(y)
    if not (is_feasible(net, x) and is_feasible(net, y)):
        raise ContractError("prune transitions are defined between feasible states")
    feasible, _ = _feasible_array(net, cap)
    row = _transition_rows(net, feasible, [x], subset_cap)[0]
    j = np.flatnonzero((feasible == y).all(axis=1))[0]
    return float(row[j])


def prune_transition_matrix(net: Network, cap: int = STATE_CAP,
                            subset_cap: int = SUBSET_CAP) -> TransitionMatrix:
    feasible, _ = _feasible_array(net, cap)
    return TransitionMatrix(feasible, _transition_rows(net, feasible, feasible, subset_cap))


def stationary_target(net: Network, cap: int = STATE_CAP):
    """Feasible states with their normalized joint probabilities."""
    feasible, p = _feasible_array(net, cap)
    return feasible, p / p.sum()
