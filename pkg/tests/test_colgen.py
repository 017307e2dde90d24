import random

import pytest

from kbmap.colgen import (
    APRIORI,
    SUBVALUE,
    ColGenConfig,
    price_atoms,
    solve_k_bounded,
    solve_naive,
)
from kbmap.model import GroundClause, GroundNetwork, State, world_score
from kbmap.oracle import brute_force_k_map

from conftest import random_networks


def strip_times(trace):
    trace = dict(trace)
    trace["levels"] = [{k: v for k, v in l.items() if k != "seconds"} for l in trace["levels"]]
    trace["iterations"] = [{k: v for k, v in it.items() if k != "seconds"} for it in trace["iterations"]]
    return trace


def test_fixture_trace(net):
    res = solve_k_bounded(net, ColGenConfig(k=2, m=1, pricing=APRIORI))
    scores = [s for _, s, _ in res.per_level]
    assert scores == pytest.approx([130.0, 130.95, 131.59], abs=1e-9)
    assert res.score == pytest.approx(131.59, abs=1e-9)
    assert res.state == net.state(["map(a1,a2)", "map(c1,b2)"])
    assert [net.atom_name(h) for h in res.run.pricing_order] == ["map(a1,a2)", "map(b1,b2)", "map(c1,b2)"]
    level2 = [it for it in res.run.iterations if it.n == 2]
    # first 2-level master: no gain, so the test fails and map(b1,b2) is priced
    assert level2[0].score == pytest.approx(130.95)
    assert [net.atom_name(h) for h in level2[0].priced] == ["map(b1,b2)"]
    assert level2[1].state == (net.atom_id("map(a1,a2)"),)
    assert [net.atom_name(h) for h in level2[1].priced] == ["map(c1,b2)"]
    assert not level2[-1].failed
    assert res.final_master_dims == (5, 7)
    assert all(res.certified)


def test_fixture_naive(net):
    res = solve_naive(net, 2)
    assert res.score == pytest.approx(131.59, abs=1e-9)
    assert res.state == net.state(["map(a1,a2)", "map(c1,b2)"])
    assert res.final_master_dims == (19, 40)


def test_first_pricing_round(net):
    assert price_atoms(net, net.atom_ids, 1, APRIORI) == [net.atom_id("map(a1,a2)")]
    res = solve_k_bounded(net, ColGenConfig(k=1, m=1, pricing=SUBVALUE))
    assert res.run.initial_pricing == (net.atom_id("map(a1,a2)"),)


def test_pricing_ties_by_id():
    network = GroundNetwork.from_clauses(4, [GroundClause(frozenset([h]), frozenset(), 0.5) for h in (3, 1, 2)])
    assert price_atoms(network, [3, 2, 1, 0], 2, APRIORI) == [1, 2]
    assert price_atoms(network, [0, 1], 1, SUBVALUE, {0: 1.0, 1: 1.0}) == [0]
    with pytest.raises(ValueError):
        price_atoms(network, [0], 1, SUBVALUE)
    with pytest.raises(ValueError):
        price_atoms(network, [0], 1, "random")


@pytest.mark.parametrize("pricing", [APRIORI, SUBVALUE])
def test_oracle_equivalence(pricing):
    rng = random.Random(41)
    for network in random_networks(80, seed=42):
        k, m = rng.randint(0, 4), rng.randint(1, 3)
        expected = brute_force_k_map(network, network.atom_ids, k)[1]
        res = solve_k_bounded(network, ColGenConfig(k=k, m=m, pricing=pricing))
        assert res.score == pytest.approx(expected, abs=1e-9)
        assert res.score == pytest.approx(world_score(network, res.state), abs=1e-9)
        assert len(res.state) <= k
        assert solve_naive(network, k).score == pytest.approx(expected, abs=1e-9)


def test_levels_are_optimal_and_monotone():
    for network in random_networks(40, seed=43, max_atoms=10):
        res = solve_k_bounded(network, ColGenConfig(k=4, m=2))
        for n, s, state in res.per_level:
            assert s == pytest.approx(brute_force_k_map(network, network.atom_ids, n)[1], abs=1e-9)
        scores = [s for _, s, _ in res.per_level]
        assert all(a <= b + 1e-9 for a, b in zip(scores, scores[1:]))


def test_screening_does_not_change_result():
    for network in random_networks(40, seed=44):
        a = solve_k_bounded(network, ColGenConfig(k=3, m=1, screen=True))
        b = solve_k_bounded(network, ColGenConfig(k=3, m=1, screen=False))
        assert a.score == b.score and a.state == b.state
        assert a.run.pricing_order == b.run.pricing_order


def test_deterministic(net):
    cfg = ColGenConfig(k=3, m=2, pricing=SUBVALUE)
    assert strip_times(solve_k_bounded(net, cfg).to_trace(net)) == strip_times(
        solve_k_bounded(net, cfg).to_trace(net))


def test_snapshot_independent_of_atom_order():
    """Relabelling atoms leaves the optimal score unchanged."""
    rng = random.Random(45)
    for network in random_networks(30, seed=46):
        n = network.num_atoms
        perm = list(range(n))
        rng.shuffle(perm)
        relabelled = GroundNetwork.from_clauses(n, [
            GroundClause(frozenset(perm[a] for a in c.pos), frozenset(perm[a] for a in c.neg), c.weight)
            for c in network.clauses])
        cfg = ColGenConfig(k=3, m=2)
        assert solve_k_bounded(network, cfg).score == pytest.approx(
            solve_k_bounded(relabelled, cfg).score, abs=1e-9)


def test_k_zero_and_empty_network(net):
    res = solve_k_bounded(net, ColGenConfig(k=0))
    assert res.state == State() and res.score == pytest.approx(130.0)
    empty = GroundNetwork.from_clauses(0, [])
    assert solve_k_bounded(empty, ColGenConfig(k=2)).score == 0.0


def test_k_beyond_atoms(net):
    res = solve_k_bounded(net, ColGenConfig(k=10, m=2))
    assert res.score == pytest.approx(brute_force_k_map(net, net.atom_ids, 6)[1], abs=1e-9)


@pytest.mark.parametrize("kwargs", [dict(k=-1), dict(k=1, m=0), dict(k=1, pricing="best")])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ColGenConfig(**kwargs)


def test_backends_agree():
    pytest.importorskip("scipy.optimize")
    for network in random_networks(15, seed=47):
        a = solve_k_bounded(network, ColGenConfig(k=3, m=2, backend="bnb"))
        b = solve_k_bounded(network, ColGenConfig(k=3, m=2, backend="highs"))
        assert a.score == pytest.approx(b.score, abs=1e-9)


def test_trace_shape(net):
    trace = solve_k_bounded(net, ColGenConfig(k=2)).to_trace(net)
    assert trace["method"] == "colgen"
    assert [l["n"] for l in trace["levels"]] == [0, 1, 2]
    assert trace["result"]["state"] == ["map(a1,a2)", "map(c1,b2)"]
    assert trace["pricing"] == ["map(a1,a2)", "map(b1,b2)", "map(c1,b2)"]
