"""Discrete Bayesian network model.

Variables are stored in topological order and identified by their position.
Every CPT entry is addressable as a :class:`CptLabel`; internally labels are
numbered consecutively (variable by variable, then parent configuration, then
child state), which is the layout the sampling kernels operate on.

Parent configurations are indexed mixed-radix over the variable's parent
order with the *last* parent varying fastest.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    ContractError,
    CycleError,
    NetworkError,
    NormalizationError,
    StuckStateError,
)

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    states: tuple[str, ...]
    parents: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        object.__setattr__(self, "parents", tuple(int(p) for p in self.parents))
        if len(self.states) < 1:
            raise NetworkError(f"variable {self.name!r} has no states")
        if len(set(self.states)) != len(self.states):
            raise NetworkError(f"variable {self.name!r} has duplicate state names")
        if len(set(self.parents)) != len(self.parents):
            raise NetworkError(f"variable {self.name!r} lists a parent twice")
        if self.id in self.parents:
            raise NetworkError(f"variable {self.name!r} is its own parent")

    @property
    def cardinality(self) -> int:
        return len(self.states)


@dataclass(frozen=True, eq=False)
class Cpt:
    """Conditional probability table.

    ``columns[j]`` is the distribution of the child under parent
    configuration ``j``; the array is read-only.
    """

    child: int
    parent_order: tuple[int, ...]
    columns: np.ndarray

    def __post_init__(self):
        cols = np.array(self.columns, dtype=np.float64)
        if cols.ndim != 2:
            raise NetworkError(f"CPT of variable {self.child} must be 2-D")
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "parent_order", tuple(int(p) for p in self.parent_order))

    def __eq__(self, other):
        if not isinstance(other, Cpt):
            return NotImplemented
        return (
            self.child == other.child
            and self.parent_order == other.parent_order
            and self.columns.shape == other.columns.shape
            and bool(np.array_equal(self.columns, other.columns))
        )

    __hash__ = None


@dataclass(frozen=True, order=True)
class CptLabel:
    """One CPT entry: ``P(variable = child_state | parents = parent_config)``."""

    variable: int
    child_state: int
    parent_config: int


class FlatNetwork(NamedTuple):
    """Array layout consumed by the kernels.

    Label ``offset[v] + config * card[v] + state`` holds the CPT value in
    ``values``. ``par_*`` list each variable's parents with their mixed-radix
    strides, ``ch_*`` list each variable's children with the stride the
    variable carries inside the child's configuration index.
    """

    card: np.ndarray
    offset: np.ndarray
    par_ptr: np.ndarray
    par_idx: np.ndarray
    par_stride: np.ndarray
    ch_ptr: np.ndarray
    ch_idx: np.ndarray
    ch_stride: np.ndarray
    values: np.ndarray


class LabelSet:
    """An immutable set of CPT labels of one network, backed by a boolean mask."""

    __slots__ = ("net", "mask")

    def __init__(self, net: "Network", mask):
        mask = np.array(mask, dtype=bool)
        if mask.shape != (net.n_labels,):
            raise ContractError("label mask does not match the network")
        mask.setflags(write=False)
        self.net = net
        self.mask = mask

    @classmethod
    def from_labels(cls, net, labels: Iterable[CptLabel]):
        mask = np.zeros(net.n_labels, dtype=bool)
        for label in labels:
            mask[net.label_id(label)] = True
        return cls(net, mask)

    def _other(self, other):
        if not isinstance(other, LabelSet):
            other = LabelSet.from_labels(self.net, other)
        if other.net is not self.net:
            raise ContractError("label sets belong to different networks")
        return other.mask

    def __contains__(self, label):
        return bool(self.mask[self.net.label_id(label)])

    def __iter__(self) -> Iterator[CptLabel]:
        for i in np.flatnonzero(self.mask):
            yield self.net.label_at(int(i))

    def __len__(self):
        return int(self.mask.sum())

    def __eq__(self, other):
        if isinstance(other, (set, frozenset)):
            return set(self) == other
        if not isinstance(other, LabelSet):
            return NotImplemented
        return other.net is self.net and bool(np.array_equal(self.mask, other.mask))

    __hash__ = None

    def __sub__(self, other):
        return LabelSet(self.net, self.mask & ~self._other(other))

    def __or__(self, other):
        return LabelSet(self.net, self.mask | self._other(other))

    def __and__(self, other):
        return LabelSet(self.net, self.mask & self._other(other))

    def __le__(self, other):
        return not bool((self.mask & ~self._other(other)).any())

    def __ge__(self, other):
        return not bool((self._other(other) & ~self.mask).any())

    def names(self) -> list[str]:
        return [self.net.label_name(label) for label in self]

    def __repr__(self):
        return "LabelSet({" + ", ".join(self.names()) + "})"


class Network:
    """Immutable discrete Bayesian network.

    Parameters
    ----------
    variables : sequence of Variable
        In topological order; ``variables[i].id == i``.
    cpts : sequence of Cpt
        One per variable, in the same order.
    name : str
    evidence : mapping of variable id to state index, optional
        Bookkeeping for networks produced by :func:`reduce_evidence`. The
        CPT columns of evidence variables are likelihood columns and are
        exempt from the sum-to-one check.
    """

    def __init__(self, variables: Sequence[Variable], cpts: Sequence[Cpt], name="", evidence=None):
        self.variables = tuple(variables)
        self.cpts = tuple(cpts)
        self.name = str(name)
        self.evidence = dict(sorted((int(k), int(v)) for k, v in (evidence or {}).items()))
        self._validate()
        self._by_name = {v.name: v.id for v in self.variables}

    def _validate(self):
        n = len(self.variables)
        if len(self.cpts) != n:
            raise NetworkError("need exactly one CPT per variable")
        names = set()
        for i, var in enumerate(self.variables):
            if var.id != i:
                raise NetworkError(f"variable {var.name!r} has id {var.id}, expected {i}")
            if var.name in names:
                raise NetworkError(f"duplicate variable name {var.name!r}")
            names.add(var.name)
            for p in var.parents:
                if not 0 <= p < n:
                    raise NetworkError(f"variable {var.name!r} has unknown parent {p}")
                if p >= i:
                    raise CycleError(
                        f"variable {var.name!r} precedes its parent "
                        f"{self.variables[p].name!r}; order is not topological"
                    )
        for i, (var, cpt) in enumerate(zip(self.variables, self.cpts)):
            if cpt.child != i:
                raise NetworkError(f"CPT {i} is attached to variable {cpt.child}")
            if cpt.parent_order != var.parents:
                raise NetworkError(f"CPT parent order of {var.name!r} differs from its parents")
            ncols = int(np.prod([self.variables[p].cardinality for p in var.parents], dtype=np.int64))
            if cpt.columns.shape != (ncols, var.cardinality):
                raise NetworkError(
                    f"CPT of {var.name!r} has shape {cpt.columns.shape}, "
                    f"expected {(ncols, var.cardinality)}"
                )
            cols = cpt.columns
            if not np.all(np.isfinite(cols)) or cols.min() < 0.0 or cols.max() > 1.0:
                raise NetworkError(f"CPT of {var.name!r} has entries outside [0, 1]")
            if i in self.evidence:
                continue
            sums = cols.sum(axis=1)
            bad = np.flatnonzero(np.abs(sums - 1.0) > NORMALIZATION_TOL)
            if bad.size:
                j = int(bad[0])
                raise NormalizationError(
                    f"CPT column {j} of {var.name!r} sums to {sums[j]!r}"
                )
        for k, v in self.evidence.items():
            if not (0 <= k < n and 0 <= v < self.variables[k].cardinality):
                raise NetworkError(f"invalid evidence entry {k}={v}")

    # -- basic accessors -------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.variables)

    def __len__(self):
        return len(self.variables)

    def __repr__(self):
        return f"Network({self.name!r}, {self.n} variables, {self.n_labels} labels)"

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.name == other.name
            and self.variables == other.variables
            and self.cpts == other.cpts
            and self.evidence == other.evidence
        )

    __hash__ = None

    def index(self, var) -> int:
        """Resolve a variable name or id to an id."""
        if isinstance(var, (int, np.integer)):
            if not 0 <= int(var) < self.n:
                raise ContractError(f"no variable with id {var}")
            return int(var)
        try:
            return self._by_name[var]
        except KeyError:
            raise ContractError(f"no variable named {var!r}") from None

    def state_index(self, var, state) -> int:
        v = self.variables[self.index(var)]
        if isinstance(state, (int, np.integer)) and not isinstance(state, bool):
            if not 0 <= int(state) < v.cardinality:
                raise ContractError(f"state {state} out of range for {v.name!r}")
            return int(state)
        try:
            return v.states.index(str(state))
        except ValueError:
            raise ContractError(f"{v.name!r} has no state {state!r}") from None

    def assignment(self, values: Mapping) -> dict[int, int]:
        """Normalize a name/id keyed mapping into ``{variable id: state index}``."""
        return {self.index(k): self.state_index(k, s) for k, s in values.items()}

    @cached_property
    def cardinalities(self) -> np.ndarray:
        return np.array([v.cardinality for v in self.variables], dtype=np.int64)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids = [[] for _ in self.variables]
        for var in self.variables:
            for p in var.parents:
                kids[p].append(var.id)
        return tuple(tuple(k) for k in kids)

    # -- label layout ----------------------------------------------------

    @cached_property
    def flat(self) -> FlatNetwork:
        n = self.n
        card = self.cardinalities
        offset = np.zeros(n + 1, dtype=np.int64)
        par_ptr = np.zeros(n + 1, dtype=np.int64)
        par_idx, par_stride = [], []
        for i, var in enumerate(self.variables):
            offset[i + 1] = offset[i] + self.cpts[i].columns.size
            stride = 1
            strides = []
            for p in reversed(var.parents):
                strides.append(stride)
                stride *= int(card[p])
            par_idx.extend(var.parents)
            par_stride.extend(reversed(strides))
            par_ptr[i + 1] = len(par_idx)
        ch_ptr = np.zeros(n + 1, dtype=np.int64)
        ch_idx, ch_stride = [], []
        for i in range(n):
            for c in self.children[i]:
                pos = self.variables[c].parents.index(i)
                ch_idx.append(c)
                ch_stride.append(par_stride[par_ptr[c] + pos])
            ch_ptr[i + 1] = len(ch_idx)
        values = np.concatenate([c.columns.ravel() for c in self.cpts]) if n else np.zeros(0)
        arrays = FlatNetwork(
            card,
            offset,
            par_ptr,
            np.array(par_idx, dtype=np.int64),
            np.array(par_stride, dtype=np.int64),
            ch_ptr,
            np.array(ch_idx, dtype=np.int64),
            np.array(ch_stride, dtype=np.int64),
            np.ascontiguousarray(values, dtype=np.float64),
        )
        for a in arrays:
            a.setflags(write=False)
        return arrays

    @property
    def n_labels(self) -> int:
        return int(self.flat.offset[-1])

    @property
    def all_labels(self) -> LabelSet:
        return LabelSet(self, np.ones(self.n_labels, dtype=bool))

    def positive_labels(self) -> LabelSet:
        return LabelSet(self, self.flat.values > 0)

    def label_id(self, label: CptLabel) -> int:
        v = label.variable
        card = self.variables[v].cardinality
        ncols = self.cpts[v].columns.shape[0]
        if not (0 <= label.child_state < card and 0 <= label.parent_config < ncols):
            raise ContractError(f"{label} does not address an entry of the CPT")
        return int(self.flat.offset[v]) + label.parent_config * card + label.child_state

    def label_at(self, lid: int) -> CptLabel:
        v = int(np.searchsorted(self.flat.offset, lid, side="right")) - 1
        card = self.variables[v].cardinality
        rel = lid - int(self.flat.offset[v])
        return CptLabel(v, rel % card, rel // card)

    def label_value(self, label: CptLabel) -> float:
        return float(self.flat.values[self.label_id(label)])

    def label_name(self, label: CptLabel) -> str:
        """Display name ``Var(k)``: entries numbered 1.. row by row of the printed CPT."""
        ncols = self.cpts[label.variable].columns.shape[0]
        k = label.child_state * ncols + label.parent_config + 1
        return f"{self.variables[label.variable].name}({k})"

    def parent_config(self, x, i: int) -> int:
        flat = self.flat
        cfg = 0
        for k in range(flat.par_ptr[i], flat.par_ptr[i + 1]):
            cfg += int(x[flat.par_idx[k]]) * int(flat.par_stride[k])
        return cfg

    def full_state(self, x) -> np.ndarray:
        """Validate a full assignment given as a sequence, array or mapping."""
        if isinstance(x, Mapping):
            vals = self.assignment(x)
            if len(vals) != self.n:
                raise ContractError("assignment is partial; a full state is required")
            arr = np.array([vals[i] for i in range(self.n)], dtype=np.int64)
        else:
            arr = np.asarray(x, dtype=np.int64)
            if arr.shape != (self.n,):
                raise ContractError("assignment is partial; a full state is required")
        if np.any(arr < 0) or np.any(arr >= self.cardinalities):
            raise ContractError("state index out of range")
        return arr

    def label_ids_of(self, x) -> np.ndarray:
        x = self.full_state(x)
        flat = self.flat
        ids = np.empty(self.n, dtype=np.int64)
        for i in range(self.n):
            ids[i] = flat.offset[i] + self.parent_config(x, i) * flat.card[i] + x[i]
        return ids

    def describe(self, x) -> dict[str, str]:
        x = self.full_state(x)
        return {v.name: v.states[int(s)] for v, s in zip(self.variables, x)}


def make_network(name, variables, tables, evidence=None) -> Network:
    """Build a network from names, sorting variables topologically.

    Parameters
    ----------
    variables : list of ``(name, states, parent_names)``
        Declaration order is kept wherever the graph allows it.
    tables : mapping of variable name to array-like of shape ``(n_configs, card)``
        Columns in mixed-radix order over ``parent_names`` (last fastest).
    """
    decl = {}
    for vname, states, parents in variables:
        if vname in decl:
            raise NetworkError(f"duplicate variable name {vname!r}")
        decl[vname] = (tuple(states), tuple(parents))
    for vname, (_, parents) in decl.items():
        for p in parents:
            if p not in decl:
                raise NetworkError(f"variable {vname!r} has unknown parent {p!r}")
    missing = [v for v in decl if v not in tables]
    if missing:
        raise NetworkError(f"no CPT for variable {missing[0]!r}")

    # Kahn's algorithm, picking the earliest declared ready variable each time.
    names = list(decl)
    rank = {v: i for i, v in enumerate(names)}
    indeg = {v: len(decl[v][1]) for v in names}
    kids = {v: [] for v in names}
    for v in names:
        for p in decl[v][1]:
            kids[p].append(v)
    import heapq

    ready = [rank[v] for v in names if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = names[heapq.heappop(ready)]
        order.append(v)
        for c in kids[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, rank[c])
    if len(order) != len(names):
        stuck = [v for v in names if indeg[v] > 0]
        raise CycleError(f"network graph has a cycle through {stuck[0]!r}")

    pos = {v: i for i, v in enumerate(order)}
    vars_, cpts = [], []
    for i, v in enumerate(order):
        states, parents = decl[v]
        pids = tuple(pos[p] for p in parents)
        vars_.append(Variable(i, v, states, pids))
        cpts.append(Cpt(i, pids, np.asarray(tables[v], dtype=np.float64)))
    ev = None
    if evidence:
        ev = {pos[k]: vars_[pos[k]].states.index(s) if isinstance(s, str) else s
              for k, s in evidence.items()}
    return Network(vars_, cpts, name=name, evidence=ev)


# -- operations ------------------------------------------------------------


def labels_of(net: Network, x) -> LabelSet:
    """The CPT labels selected by the full state ``x`` (one per variable)."""
    mask = np.zeros(net.n_labels, dtype=bool)
    mask[net.label_ids_of(x)] = True
    return LabelSet(net, mask)


def joint_probability(net: Network, x) -> float:
    """Product of the CPT entries addressed by ``x``."""
    p = 1.0
    for v in net.flat.values[net.label_ids_of(x)]:
        p *= float(v)
    return p


def is_feasible(net: Network, x) -> bool:
    return bool(np.all(net.flat.values[net.label_ids_of(x)] > 0))


def reduce_evidence(net: Network, evidence: Mapping) -> Network:
    """Condition ``net`` on ``evidence`` by rewriting CPT columns.

    For an observed variable every entry of a non-observed state becomes 0.
    The observed entry keeps its value, so the joint of the reduced network is
    ``P(x, e)``; for root variables that constant is dropped and the column
    becomes the exact indicator. Structure and label indexing are unchanged.
    """
    ev = net.assignment(evidence)
    if not ev:
        return net
    cpts = list(net.cpts)
    for i, s in ev.items():
        old = net.cpts[i].columns
        cols = np.zeros_like(old)
        if net.variables[i].parents:
            cols[:, s] = old[:, s]
        else:
            cols[:, s] = 1.0
        cpts[i] = Cpt(i, net.cpts[i].parent_order, cols)
    merged = dict(net.evidence)
    merged.update(ev)
    return Network(net.variables, cpts, name=net.name, evidence=merged)


def local_conditional(net: Network, x, i) -> np.ndarray:
    """``P(X_i | x_-i)`` from the Markov blanket of variable ``i``."""
    from .kernels import blanket_weights

    x = net.full_state(x)
    i = net.index(i)
    w = blanket_weights(net.flat, x, i)
    total = np.cumsum(w)[-1]
    if not total > 0:
        raise StuckStateError(
            f"every value of {net.variables[i].name!r} has zero probability "
            "given its Markov blanket"
        )
    return w / total
