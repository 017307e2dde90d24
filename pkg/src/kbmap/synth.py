"""Seeded synthetic instances.

``generate_matching`` writes a two-taxonomy matching problem in the program
text format. The generator draws from ``random.Random(seed)`` (Mersenne
Twister, identical on every platform) in this fixed order:

1. ``sub1``: for child i = 1..L-1, for parent j = 0..i-1, an edge
   ``sub1(l<i>, l<j>)`` with probability ``subsumption_density``. Parents
   always have smaller indices, so the taxonomy is acyclic.
2. ``sub2``: the same over the right concepts.
3. ``dis1``: for i < j, the symmetric pair ``dis1(l<i>,l<j>)``,
   ``dis1(l<j>,l<i>)`` with probability ``disjointness_density``.
4. ``dis2``: the same over the right concepts.
5. similarities: for each left concept, for each right concept, a uniform
   draw in [0, 1) rounded to 4 decimals, emitted as a unit clause on ``map``.

``random_network`` draws ground networks directly and is used by the
property tests.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass

from .grounder import DEFAULT_HARD_WEIGHT
from .model import GroundClause, GroundNetwork


@dataclass(frozen=True)
class GenSpec:
    seed: int = 0
    concepts_left: int = 20
    concepts_right: int = 20
    subsumption_density: float = 0.1
    disjointness_density: float = 0.05
    similarity_distribution: str = "uniform"
    hard_weight: float = DEFAULT_HARD_WEIGHT
    propagation_weight: float = 0.1

    def __post_init__(self):
        for name in ("subsumption_density", "disjointness_density"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.concepts_left < 1 or self.concepts_right < 1:
            raise ValueError("need at least one concept on each side")
        if self.similarity_distribution != "uniform":
            raise ValueError("only the uniform similarity distribution is supported")

    @classmethod
    def from_json(cls, text: str) -> "GenSpec":
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown GenSpec fields: {sorted(unknown)}")
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _taxonomy(rng: random.Random, names: list[str], density: float) -> list[tuple[str, str]]:
    return [(names[i], names[j]) for i in range(1, len(names)) for j in range(i)
            if rng.random() < density]


def _disjoint(rng: random.Random, names: list[str], density: float) -> list[tuple[str, str]]:
    pairs = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            if rng.random() < density:
                pairs += [(names[i], names[j]), (names[j], names[i])]
    return pairs


def generate_matching(spec: GenSpec) -> tuple[str, str]:
    """Return ``(program_text, evidence_text)`` for ``spec``."""
    rng = random.Random(spec.seed)
    left = [f"l{i}" for i in range(spec.concepts_left)]
    right = [f"r{j}" for j in range(spec.concepts_right)]
    sub1 = _taxonomy(rng, left, spec.subsumption_density)
    sub2 = _taxonomy(rng, right, spec.subsumption_density)
    dis1 = _disjoint(rng, left, spec.disjointness_density)
    dis2 = _disjoint(rng, right, spec.disjointness_density)
    sim = [(x, y, round(rng.random(), 4)) for x in left for y in right]

    hw = repr(float(spec.hard_weight))
    pw = repr(float(spec.propagation_weight))
    program = [
        f"# generated matching instance, seed {spec.seed}",
        f"type L: {', '.join(left)}",
        f"type R: {', '.join(right)}",
        "observable sub1(L, L)",
        "observable dis1(L, L)",
        "observable sub2(R, R)",
        "observable dis2(R, R)",
        "hidden map(L, R)",
        "",
        f"{hw} !dis1(x,x') v !sub2(y,y') v !map(x,y) v !map(x',y')",
        f"{hw} !map(x,y) v !map(x,z) v y = z",
        f"{hw} !map(x,y) v !map(z,y) v x = z",
        f"{pw} !sub1(x,x') v !sub2(y,y') v !map(x,y) v map(x',y')",
    ]
    program += [f"{w!r} map({x},{y})" for x, y, w in sim]
    evidence = [f"sub1({a},{b})" for a, b in sub1]
    evidence += [f"sub2({a},{b})" for a, b in sub2]
    evidence += [f"dis1({a},{b})" for a, b in dis1]
    evidence += [f"dis2({a},{b})" for a, b in dis2]
    return "\n".join(program) + "\n", "\n".join(evidence) + ("\n" if evidence else "")


def random_network(rng: random.Random, max_atoms: int = 12, max_clauses: int = 60,
                   max_len: int = 4, negative_weights: bool = True,
                   min_atoms: int = 1) -> GroundNetwork:
    """A random ground network with mixed-polarity clauses.

    About a third of the clauses are positive unit clauses so that a-priori
    pricing has something to rank; weights are drawn from a few scales,
    including the 10.0 used for hard constraints.
    """
    n = rng.randint(min_atoms, max_atoms)
    num = rng.randint(0, max_clauses)
    seen: dict[tuple[frozenset, frozenset], float] = {}
    for _ in range(num):
        if rng.random() < 0.35:
            pos, neg = frozenset([rng.randrange(n)]), frozenset()
        else:
            size = rng.randint(1, min(max_len, n))
            atoms = rng.sample(range(n), size)
            signs = [rng.random() < 0.3 for _ in atoms]
            pos = frozenset(a for a, s in zip(atoms, signs) if s)
            neg = frozenset(a for a, s in zip(atoms, signs) if not s)
        r = rng.random()
        if r < 0.3:
            w = 10.0
        elif r < 0.4 and negative_weights:
            w = -round(rng.uniform(0, 2), 3)
        else:
            w = round(rng.uniform(0, 1), 3)
        seen[(pos, neg)] = seen.get((pos, neg), 0.0) + w
    clauses = [GroundClause(p, q, w) for (p, q), w in seen.items()]
    return GroundNetwork.from_clauses(n, clauses)
