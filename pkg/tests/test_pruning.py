import numpy as np
import pytest

from prunesampling import (
    CapExceededError, ContractError, CptLabel, LabelSet, SamplerConfig, SamplingError,
    bounded_candidates, enumerate_feasible, enumerate_pruned, labels_of,
    prune_around, prune_transition_matrix, run_chain, uniform_draw,
)
from prunesampling.pruning import PrunedSpace

from _nets import block_chain, bp, fig1, grid, random_net


def rng(seed=0):
    return np.random.default_rng(seed)


def bp_state(net, **names):
    return tuple(net.state_index(k, v) for k, v in names.items())


def figure2_retained(net):
    """All labels except the entries crossed out in the pruned BloodPressure figure."""
    def lab(var, state, config):
        i = net.index(var)
        return CptLabel(i, net.state_index(var, state), config)

    crossed = [
        lab("Kidney", "k_b", 0),
        lab("BloodPressure", "b_n", 0), lab("BloodPressure", "b_n", 1),
        lab("BloodPressure", "b_n", 2), lab("BloodPressure", "b_e", 3),
        lab("Sports", "s_n", 1), lab("Sports", "s_y", 1),
        lab("Measurement", "m_n", 1), lab("Measurement", "m_e", 0),
    ]
    return net.all_labels - crossed


# -- prune_around ---------------------------------------------------------------------


def test_prune_keeps_origin_labels_and_certain_labels():
    net = fig1()
    r = rng()
    for _ in range(200):
        kept = prune_around(net, (0, 0), r)
        assert {"A(1)", "B(1)", "B(4)"} <= set(kept.names())
        assert "B(2)" not in kept.names() and "B(3)" not in kept.names()


def test_prune_fig1_a2_retained_half_the_time():
    net = fig1()
    r = rng(1)
    a2 = CptLabel(0, 1, 0)
    hits = sum(a2 in prune_around(net, (0, 0), r) for _ in range(10_000))
    assert abs(hits / 10_000 - 0.5) <= 0.02


def test_prune_consumes_one_uniform_per_label():
    net = bp()
    r1, r2 = rng(5), rng(5)
    prune_around(net, (1, 0, 1, 1, 1), r1)
    r2.random(net.n_labels)
    assert r1.random() == r2.random()


def test_prune_around_infeasible_state():
    with pytest.raises(ContractError):
        prune_around(fig1(), (0, 1), rng())


def test_prune_retention_frequency_matches_label_value():
    net = bp()
    x = (1, 0, 1, 1, 1)
    r = rng(2)
    counts = np.zeros(net.n_labels)
    trials = 5000
    for _ in range(trials):
        counts += prune_around(net, x, r).mask
    expected = net.flat.values.copy()
    expected[net.label_ids_of(x)] = 1.0
    assert np.max(np.abs(counts / trials - expected)) <= 0.03


# -- enumerate_pruned -------------------------------------------------------------------


def test_figure2_space_has_two_states():
    net = bp()
    x = bp_state(net, Kidney="k_g", Lifestyle="l_b", BloodPressure="b_e", Sports="s_y",
                 Measurement="m_e")
    other = bp_state(net, Kidney="k_g", Lifestyle="l_b", BloodPressure="b_e", Sports="s_n",
                     Measurement="m_e")
    space = enumerate_pruned(net, figure2_retained(net), origin=x)
    assert sorted(map(tuple, space.states)) == sorted([x, other])
    assert x in space


def test_all_positive_labels_give_full_feasible_set():
    net = fig1()
    space = enumerate_pruned(net, net.positive_labels())
    assert [tuple(s) for s in space.states] == [(0, 0), (1, 1)]


def test_origin_labels_only_give_the_origin():
    net = bp()
    x = (1, 0, 1, 1, 1)
    space = enumerate_pruned(net, labels_of(net, x), origin=x)
    assert [tuple(s) for s in space.states] == [x]


def test_enumerate_cap_exceeded():
    net = block_chain(6)
    with pytest.raises(CapExceededError, match="too large"):
        enumerate_pruned(net, net.all_labels, cap=100)


def test_enumerate_requires_origin_labels():
    net = fig1()
    with pytest.raises(ContractError):
        enumerate_pruned(net, labels_of(net, (1, 1)), origin=(0, 0))


@pytest.mark.parametrize("seed", range(15))
def test_enumeration_is_complete(seed):
    r = rng(seed)
    net = random_net(r, int(r.integers(2, 9)), card=3, zero_prob=0.3)
    feasible = enumerate_feasible(net)
    retained = LabelSet(net, r.random(net.n_labels) < 0.6)
    expected = sorted(s for s, _ in feasible if retained.mask[net.label_ids_of(s)].all())
    got = [tuple(int(v) for v in s) for s in enumerate_pruned(net, retained).states]
    assert got == expected


@pytest.mark.parametrize("make", [fig1, bp, lambda: block_chain(3), lambda: grid(2, 3, 0.5, 1)],
                         ids=["fig1", "bp", "block3", "grid"])
def test_closure_over_random_prunes(make):
    net = make()
    r = rng(3)
    feasible = [np.array(s) for s, _ in enumerate_feasible(net)]
    x = feasible[0]
    full = 0
    trials = 10_000 if net.name == "bloodpressure" else 2500
    positive = net.flat.values > 0
    for _ in range(trials):
        kept = prune_around(net, x, r)
        space = enumerate_pruned(net, kept, origin=x)
        assert x.tolist() in space.states.tolist()
        assert (net.flat.values[np.array([net.label_ids_of(s) for s in space.states])] > 0).all()
        full += np.array_equal(kept.mask & positive, positive)
        x = uniform_draw(space, r)
    if net.name == "two-node-deterministic":
        # all positive labels retained: S is the whole feasible set
        assert full > 0


# -- uniform_draw ---------------------------------------------------------------------------


def test_uniform_draw_single_state():
    net = fig1()
    space = enumerate_pruned(net, labels_of(net, (1, 1)), origin=(1, 1))
    r = rng()
    assert all(tuple(uniform_draw(space, r)) == (1, 1) for _ in range(100))


def test_uniform_draw_two_states():
    net = fig1()
    space = enumerate_pruned(net, net.positive_labels())
    r = rng(4)
    hits = sum(tuple(uniform_draw(space, r)) == (0, 0) for _ in range(10_000))
    assert abs(hits / 10_000 - 0.5) <= 0.02


def test_uniform_draw_figure2_origin_half():
    net = bp()
    x = bp_state(net, Kidney="k_g", Lifestyle="l_b", BloodPressure="b_e", Sports="s_y",
                 Measurement="m_e")
    space = enumerate_pruned(net, figure2_retained(net), origin=x)
    r = rng(6)
    hits = sum(tuple(uniform_draw(space, r)) == x for _ in range(10_000))
    assert abs(hits / 10_000 - 0.5) <= 0.02


def test_uniform_draw_empty():
    net = fig1()
    empty = PrunedSpace(net.all_labels, np.zeros((0, 2), dtype=np.int64), np.zeros(2, dtype=np.int64))
    with pytest.raises(ContractError):
        uniform_draw(empty, rng())


# -- one-step frequencies against the oracle ----------------------------------------------


@pytest.mark.parametrize("make", [fig1, lambda: block_chain(2)], ids=["fig1", "block2"])
def test_one_step_frequencies_match_oracle(make):
    net = make()
    tm = prune_transition_matrix(net)
    m = len(tm.states)
    trace = run_chain(net, SamplerConfig("prune", samples=100_000 * m, seed=11))
    radix = np.cumprod(np.r_[1, net.cardinalities[::-1][:-1]])[::-1]
    lookup = {int(k): i for i, k in enumerate(tm.states @ radix)}
    src = np.vectorize(lookup.get)(trace.previous @ radix)
    dst = np.vectorize(lookup.get)(trace.states @ radix)
    counts = np.zeros((m, m))
    np.add.at(counts, (src, dst), 1)
    freq = counts / counts.sum(axis=1, keepdims=True)
    assert counts.sum(axis=1).min() >= 80_000
    assert np.max(np.abs(freq - tm.matrix)) <= 0.01


# -- bounded candidates ----------------------------------------------------------------------


def test_bounded_size_one_from_origin():
    net = bp()
    x = (1, 0, 1, 1, 1)
    kept = prune_around(net, x, rng())
    space = bounded_candidates(net, kept, 1, 10, rng(), origin=x)
    assert [tuple(s) for s in space.states] == [x]
    assert not space.exact


def test_bounded_finds_both_fig1_states():
    net = fig1()
    space = bounded_candidates(net, net.positive_labels(), 2, 1000, rng())
    assert sorted(tuple(s) for s in space.states) == [(0, 0), (1, 1)]


def test_bounded_deduplicates():
    net = fig1()
    space = bounded_candidates(net, net.positive_labels(), 10, 500, rng())
    assert len(space) == 2


def test_bounded_zero_budget():
    net = fig1()
    with pytest.raises(SamplingError):
        bounded_candidates(net, net.positive_labels(), 2, 0, rng())


def test_bounded_size_zero():
    with pytest.raises(ContractError):
        bounded_candidates(fig1(), fig1().positive_labels(), 0, 10, rng())


def test_bounded_no_state_found():
    net = fig1()
    # only A(1) and B(4) retained: every attempt dead-ends
    kept = LabelSet.from_labels(net, [CptLabel(0, 0, 0), CptLabel(1, 1, 1)])
    with pytest.raises(SamplingError):
        bounded_candidates(net, kept, 1, 20, rng())
