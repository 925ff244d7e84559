"""Random pruning around a state and the state sets it induces."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CapExceededError, ContractError, SamplingError
from .network import LabelSet, Network, is_feasible

STATE_CAP = 10**6


@dataclass(frozen=True, eq=False)
class PrunedSpace:
    """Retained labels, the states built only from them, and the pruning origin.

    ``exact`` is False when ``states`` is a bounded heuristic sample rather
    than the complete induced set.
    """

    retained: LabelSet
    states: np.ndarray
    origin: np.ndarray
    exact: bool = True

    def __len__(self):
        return self.states.shape[0]

    def __contains__(self, x):
        return bool((self.states == np.asarray(x)).all(axis=1).any())


def _retained_mask(net, x, u):
    mask = u < net.flat.values
    mask[net.label_ids_of(x)] = True
    return mask


def prune_around(net: Network, x, rng) -> LabelSet:
    """Keep every label of ``x``; keep any other label with probability ``c``.

    Draws exactly ``net.n_labels`` uniforms from ``rng``.
    """
    x = net.full_state(x)
    if not is_feasible(net, x):
        raise ContractError("can only prune around a feasible state")
    return LabelSet(net, _retained_mask(net, x, rng.random(net.n_labels)))


def enumerate_pruned(net: Network, retained: LabelSet, cap: int = STATE_CAP, origin=None) -> PrunedSpace:
    """Every full state whose labels are all retained, in lexicographic order.

    Raises :class:`CapExceededError` when more than ``cap`` partial states
    exist at some depth of the search (so in particular when ``|S| > cap``).
    """
    mask = retained.mask
    if origin is None:
        origin_arr = None
    else:
        origin_arr = net.full_state(origin)
        if not mask[net.label_ids_of(origin_arr)].all():
            raise ContractError("retained labels must contain those of the origin")
    # zero-valued labels never induce feasible states
    mask = mask & (net.flat.values > 0)
    states, ok = kernels.enumerate_states(net.flat, mask, cap)
    if not ok:
        raise CapExceededError(f"pruned space too large: more than {cap} states")
    states = np.asarray(states, dtype=np.int64)
    states.setflags(write=False)
    if origin_arr is None:
        origin_arr = states[0] if len(states) else np.zeros(net.n, dtype=np.int64)
    return PrunedSpace(retained, states, origin_arr)


def uniform_draw(space: PrunedSpace, rng) -> np.ndarray:
    """One state of ``space`` uniformly at random; consumes one uniform."""
    m = len(space)
    if m == 0:
        raise ContractError("cannot draw from an empty pruned space")
    k = min(int(rng.random() * m), m - 1)
    return space.states[k].copy()


def restricted_forward(net: Network, mask, rng, retry_budget):
    """Random forward sampling that only uses labels in ``mask``.

    Each variable takes a uniform value among the allowed labels of its
    current parent configuration; a dead end restarts from the root.
    Returns None when ``retry_budget`` attempts all hit dead ends.
    """
    flat = net.flat
    x = np.zeros(net.n, dtype=np.int64)
    for _ in range(retry_budget):
        for i in range(net.n):
            base = int(flat.offset[i]) + net.parent_config(x, i) * int(flat.card[i])
            allowed = np.flatnonzero(mask[base:base + int(flat.card[i])])
            if allowed.size == 0:
                break
            x[i] = allowed[rng.integers(allowed.size)]
        else:
            return x.copy()
    return None


def bounded_candidates(net: Network, retained: LabelSet, size: int, retry_budget: int, rng,
                       origin=None) -> PrunedSpace:
    """Heuristic candidate set: up to ``size`` distinct retained-label states.

    Collected by restricted random forward sampling; each attempt either adds
    a state (possibly a duplicate) or restarts after a dead end, and the
    budget counts attempts. ``origin`` (if given) is always included. The
    result is not uniform over the induced set; ``exact`` is False.
    """
    if size < 1:
        raise ContractError("candidate set size must be >= 1")
    if retry_budget < 1:
        raise SamplingError("retry budget must allow at least one attempt")
    mask = retained.mask & (net.flat.values > 0)
    found = {}
    if origin is not None:
        origin = net.full_state(origin)
        found[tuple(origin)] = None
    attempts = 0
    while len(found) < size and attempts < retry_budget:
        x = restricted_forward(net, mask, rng, 1)
        attempts += 1
        if x is not None:
            found.setdefault(tuple(int(v) for v in x), None)
    if not found:
        raise SamplingError("no state found within the retry budget")
    states = np.array(sorted(found), dtype=np.int64).reshape(-1, net.n)
    states.setflags(write=False)
    if origin is None:
        origin = states[0]
    return PrunedSpace(retained, states, origin, exact=False)
