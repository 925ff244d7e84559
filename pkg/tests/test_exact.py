from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from prunesampling import (
    CapExceededError, ContractError, IntractableError, ZeroEvidenceError, brute_force_marginals,
    enumerate_feasible, exact_marginals, load_network, prune_transition_matrix,
    prune_transition_prob, reduce_evidence, stationary_target,
)

from _nets import block_chain, bp, fig1, grid, random_net

DATA = Path(__file__).parent / "data"

SMALL_NETS = {
    "fig1": fig1,
    "bloodpressure": bp,
    "block2": lambda: block_chain(2),
    "block3": lambda: block_chain(3),
}


# -- enumeration ---------------------------------------------------------------------


def test_enumerate_fig1():
    assert dict(enumerate_feasible(fig1())) == {(0, 0): 0.5, (1, 1): 0.5}


def test_enumerate_fig1_with_evidence():
    red = reduce_evidence(fig1(), {"B": 1})
    assert [s for s, _ in enumerate_feasible(red)] == [(1, 1)]


def test_enumerate_block_chain_2():
    states = enumerate_feasible(block_chain(2))
    assert len(states) == 8
    assert all(p == 0.125 for _, p in states)


def test_enumerate_cap():
    with pytest.raises(CapExceededError, match="state-space too large"):
        enumerate_feasible(block_chain(4), cap=10)


# -- marginals ------------------------------------------------------------------------


def test_exact_fig1():
    m = exact_marginals(fig1())
    assert m["A"][0] == 0.5


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_exact_block_chain_uniform(n):
    m = exact_marginals(block_chain(n))
    for i in range(1, n):
        np.testing.assert_allclose(m[i], 0.25, atol=1e-15)


def test_exact_bloodpressure_matches_brute_force():
    a = exact_marginals(bp())
    b = brute_force_marginals(bp())
    for i in range(5):
        np.testing.assert_allclose(a[i], b[i], atol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_exact_matches_brute_force_random(seed):
    rng = np.random.default_rng(seed)
    net = random_net(rng, int(rng.integers(2, 13)), zero_prob=0.25)
    feasible = enumerate_feasible(net)
    x = feasible[int(rng.integers(len(feasible)))][0]
    ev = {int(v): x[v] for v in rng.choice(net.n, size=int(rng.integers(0, 3)), replace=False)}
    a = exact_marginals(net, ev)
    b = brute_force_marginals(net, ev)
    for i in range(net.n):
        np.testing.assert_allclose(a[i], b[i], atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_exact_matches_brute_force_quaternary(seed):
    rng = np.random.default_rng(50 + seed)
    net = random_net(rng, 7, card=4, max_parents=2, zero_prob=0.3)
    a = exact_marginals(net)
    b = brute_force_marginals(net)
    for i in range(net.n):
        np.testing.assert_allclose(a[i], b[i], atol=1e-12)


def test_marginal_table_invariants():
    m = exact_marginals(load_network(DATA / "asia.bif"))
    assert len(m) == 8
    for i in range(8):
        assert abs(m[i].sum() - 1) <= 1e-9
        assert (m[i] >= 0).all() and (m[i] <= 1).all()
    rows = list(m.rows())
    assert rows[0][:2] == ("asia", "yes")
    assert rows[0][2] == pytest.approx(0.01)


def test_exact_zero_evidence():
    with pytest.raises(ZeroEvidenceError):
        exact_marginals(fig1(), {"A": 0, "B": 1})
    with pytest.raises(ZeroEvidenceError):
        brute_force_marginals(fig1(), {"A": 0, "B": 1})


def test_exact_intractable_guard():
    with pytest.raises(IntractableError):
        exact_marginals(grid(6, 6, 0.0, 0), max_factor_size=64)


def test_exact_alarm_runs():
    net = load_network(DATA / "alarm.bif")
    m = exact_marginals(net)
    assert all(abs(m[i].sum() - 1) < 1e-9 for i in range(net.n))


# -- transition oracle -------------------------------------------------------------------


def test_fig1_stay_probability_is_three_quarters():
    assert prune_transition_prob(fig1(), (0, 0), (0, 0)) == 0.75
    assert Fraction(prune_transition_prob(fig1(), (0, 0), (0, 0))) == Fraction(3, 4)


def test_fig1_move_probability_is_one_quarter():
    assert prune_transition_prob(fig1(), (0, 0), (1, 1)) == 0.25


def test_fig1_matrix():
    tm = prune_transition_matrix(fig1())
    np.testing.assert_array_equal(tm.matrix, [[0.75, 0.25], [0.25, 0.75]])
    assert tm((1, 1), (0, 0)) == 0.25


def test_transition_requires_feasible_states():
    with pytest.raises(ContractError):
        prune_transition_prob(fig1(), (0, 1), (0, 0))


def test_transition_subset_cap():
    with pytest.raises(CapExceededError):
        prune_transition_matrix(bp(), subset_cap=8)


@pytest.mark.parametrize("name", list(SMALL_NETS))
def test_matrix_rows_entries_and_self_loops(name):
    tm = prune_transition_matrix(SMALL_NETS[name]())
    np.testing.assert_allclose(tm.matrix.sum(axis=1), 1.0, atol=1e-9)
    assert (tm.matrix >= 0).all() and (tm.matrix <= 1).all()
    assert (np.diag(tm.matrix) > 0).all()


@pytest.mark.parametrize("name", list(SMALL_NETS))
def test_detailed_balance(name):
    net = SMALL_NETS[name]()
    tm = prune_transition_matrix(net)
    _, pi = stationary_target(net)
    flow = pi[:, None] * tm.matrix
    assert np.max(np.abs(flow - flow.T)) <= 1e-12


@pytest.mark.parametrize("name", list(SMALL_NETS))
def test_stationary_and_regular(name):
    net = SMALL_NETS[name]()
    tm = prune_transition_matrix(net)
    _, pi = stationary_target(net)
    assert np.max(np.abs(pi @ tm.matrix - pi)) <= 1e-10
    assert (tm.matrix > 0).all()


def test_transition_with_evidence():
    red = reduce_evidence(bp(), {"Measurement": "m_e"})
    tm = prune_transition_matrix(red)
    _, pi = stationary_target(red)
    flow = pi[:, None] * tm.matrix
    assert np.max(np.abs(flow - flow.T)) <= 1e-12
    assert len(tm.states) == 16
