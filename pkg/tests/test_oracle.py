import itertools

import pytest

from kbmap.model import GroundClause, GroundNetwork, State, score_delta, world_score
from kbmap.oracle import (
    MAX_CANDIDATES,
    OracleTooLargeError,
    bounded_subsets,
    brute_force_k_map,
    brute_force_subproblem,
)

from conftest import random_networks


def test_fixture_values(net):
    state, score = brute_force_k_map(net, net.atom_ids, 2)
    assert score == pytest.approx(131.59, abs=1e-9)
    assert state == net.state(["map(a1,a2)", "map(c1,b2)"])
    assert brute_force_k_map(net, net.atom_ids, 1)[1] == pytest.approx(130.95, abs=1e-9)
    assert brute_force_k_map(net, net.atom_ids, 0)[1] == pytest.approx(130.0, abs=1e-9)


def test_fixture_subproblems(net):
    h = net.atom_id("map(a1,b2)")
    assert brute_force_subproblem(net, net.atom_ids, h, 1) == pytest.approx(0.55, abs=1e-9)
    for g in net.atom_ids:
        assert brute_force_subproblem(net, net.atom_ids, g, 0) == pytest.approx(
            score_delta(net, State(), g), abs=1e-12)
    assert brute_force_subproblem(net, net.atom_ids, net.atom_id("map(a1,a2)"), 0) == pytest.approx(0.95)


def test_full_k_is_unconstrained_max():
    for network in random_networks(40, seed=31, max_atoms=8):
        atoms = list(network.atom_ids)
        best = max(world_score(network, State(frozenset(s)))
                   for r in range(len(atoms) + 1) for s in itertools.combinations(atoms, r))
        assert brute_force_k_map(network, atoms, len(atoms))[1] == pytest.approx(best, abs=1e-9)


def test_ties_prefer_smallest_tuple():
    network = GroundNetwork.from_clauses(3, [GroundClause(frozenset([h]), frozenset(), 1.0) for h in range(3)])
    state, score = brute_force_k_map(network, range(3), 1)
    assert state == State(frozenset([0])) and score == 1.0


def test_bounded_subsets():
    assert list(bounded_subsets([1, 2, 3], 1)) == [(), (1,), (2,), (3,)]
    assert len(list(bounded_subsets([1, 2, 3], 5))) == 8


def test_size_guard():
    network = GroundNetwork.from_clauses(MAX_CANDIDATES + 2, [])
    with pytest.raises(OracleTooLargeError):
        brute_force_k_map(network, network.atom_ids, 1)
    with pytest.raises(OracleTooLargeError):
        brute_force_subproblem(network, network.atom_ids, 0, 1)
