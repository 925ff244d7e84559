"""Generators for the benchmark network families."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..network import Network, make_network

FAMILIES = ("two-node-deterministic", "block-chain", "grid", "bloodpressure")

# P(X_i | X_{i-1}); row = parent value, i.e. one CPT column per row.
BLOCK_CPT = np.array([
    [0.5, 0.5, 0.0, 0.0],
    [0.5, 0.5, 0.0, 0.0],
    [0.0, 0.0, 0.5, 0.5],
    [0.0, 0.0, 0.5, 0.5],
])


@dataclass(frozen=True)
class BenchmarkSpec:
    family: str
    n: int = 5
    rows: int = 3
    cols: int = 3
    fraction: float = 0.5
    seed: int = 0

    def validate(self):
        if self.family not in FAMILIES:
            raise ContractError(f"unknown benchmark family {self.family!r}")
        if self.family == "block-chain" and self.n < 2:
            raise ContractError("block-chain needs n >= 2")
        if self.family == "grid":
            if self.rows < 2 or self.cols < 2:
                raise ContractError("grid dimensions must be >= 2")
            if not 0.0 <= self.fraction <= 1.0:
                raise ContractError("deterministic fraction must lie in [0, 1]")
        return self


def two_node_deterministic() -> Network:
    """A -> B with B a copy of A and a uniform prior on A."""
    return make_network(
        "two-node-deterministic",
        [("A", ["0", "1"], []), ("B", ["0", "1"], ["A"])],
        {"A": [[0.5, 0.5]], "B": [[1.0, 0.0], [0.0, 1.0]]},
    )


def block_chain(n: int) -> Network:
    if n < 2:
        raise ContractError("block-chain needs n >= 2")
    states = ["0", "1", "2", "3"]
    variables = [("X1", states, [])]
    tables = {"X1": [[0.25] * 4]}
    for i in range(2, n + 1):
        variables.append((f"X{i}", states, [f"X{i - 1}"]))
        tables[f"X{i}"] = BLOCK_CPT
    return make_network(f"block-chain-{n}", variables, tables)


def bloodpressure() -> Network:
    variables = [
        ("Kidney", ["k_b", "k_g"], []),
        ("Lifestyle", ["l_b", "l_g"], []),
        ("BloodPressure", ["b_n", "b_e"], ["Kidney", "Lifestyle"]),
        ("Sports", ["s_n", "s_y"], ["Lifestyle"]),
        ("Measurement", ["m_n", "m_e"], ["BloodPressure"]),
    ]
    tables = {
        "Kidney": [[0.5, 0.5]],
        "Lifestyle": [[0.5, 0.5]],
        "BloodPressure": [[0.1, 0.9], [0.2, 0.8], [0.2, 0.8], [0.9, 0.1]],
        "Sports": [[0.8, 0.2], [0.2, 0.8]],
        "Measurement": [[0.9, 0.1], [0.1, 0.9]],
    }
    return make_network("bloodpressure", variables, tables)


def grid(rows: int, cols: int, fraction: float, seed: int, card: int = 4) -> Network:
    """Grid DAG; node (i, j) has parents (i-1, j) and (i, j-1).

    Each CPT column is independently deterministic with probability
    ``fraction`` (mass 1 on a uniformly chosen state), otherwise drawn from a
    flat Dirichlet.
    """
    BenchmarkSpec("grid", rows=rows, cols=cols, fraction=fraction, seed=seed).validate()
    rng = np.random.default_rng(seed)
    states = [str(s) for s in range(card)]
    variables, tables = [], {}
    for i in range(rows):
        for j in range(cols):
            name = f"X_{i}_{j}"
            parents = []
            if i > 0:
                parents.append(f"X_{i - 1}_{j}")
            if j > 0:
                parents.append(f"X_{i}_{j - 1}")
            ncols = card ** len(parents)
            table = np.zeros((ncols, card))
            for c in range(ncols):
                if rng.random() < fraction:
                    table[c, rng.integers(card)] = 1.0
                else:
                    table[c] = rng.dirichlet(np.ones(card))
            variables.append((name, states, parents))
            tables[name] = table
    return make_network(f"grid-{rows}x{cols}-f{fraction:g}-s{seed}", variables, tables)


def generate(spec: BenchmarkSpec) -> Network:
    spec.validate()
    if spec.family == "two-node-deterministic":
        return two_node_deterministic()
    if spec.family == "block-chain":
        return block_chain(spec.n)
    if spec.family == "bloodpressure":
        return bloodpressure()
    return grid(spec.rows, spec.cols, spec.fraction, spec.seed)
