import random

import pytest

from kbmap.grounder import dimension_summary, ground
from kbmap.parser import parse_evidence, parse_program
from kbmap.synth import GenSpec, generate_matching, random_network


def test_deterministic():
    spec = GenSpec(seed=5, concepts_left=6, concepts_right=7)
    assert generate_matching(spec) == generate_matching(spec)
    assert generate_matching(spec) != generate_matching(GenSpec(seed=6, concepts_left=6, concepts_right=7))


@pytest.mark.parametrize("seed", range(5))
def test_output_parses_and_is_acyclic(seed):
    spec = GenSpec(seed=seed, concepts_left=5, concepts_right=4, subsumption_density=0.4,
                   disjointness_density=0.3)
    program_text, evidence_text = generate_matching(spec)
    program = parse_program(program_text)
    evidence = parse_evidence(evidence_text, program)
    for pred, (child, parent) in evidence.true_atoms:
        if pred.startswith("sub"):
            assert int(parent[1:]) < int(child[1:])
    network = ground(program, evidence)
    summary = dimension_summary(network)
    assert summary["atoms"] == 20
    assert summary["unit_clauses"] == 20


def test_hard_weight_written():
    text, _ = generate_matching(GenSpec(concepts_left=2, concepts_right=2, hard_weight=7.5))
    assert "7.5 !map(x,y) v !map(x,z) v y = z" in text


def test_spec_json_round_trip():
    spec = GenSpec(seed=3, concepts_left=4)
    assert GenSpec.from_json(spec.to_json()) == spec
    with pytest.raises(ValueError):
        GenSpec.from_json('{"colour": 1}')


@pytest.mark.parametrize("kwargs", [
    dict(subsumption_density=1.5), dict(disjointness_density=-0.1),
    dict(concepts_left=0), dict(similarity_distribution="normal"),
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        GenSpec(**kwargs)


def test_random_network_limits():
    rng = random.Random(0)
    for _ in range(200):
        network = random_network(rng, max_atoms=12, max_clauses=60)
        assert 1 <= network.num_atoms <= 12
        assert len(network.clauses) <= 60
        for c in network.clauses:
            assert not (c.pos & c.neg) and (c.pos or c.neg)
