import random
from pathlib import Path

import pytest

from kbmap.grounder import ground
from kbmap.parser import parse_evidence, parse_program
from kbmap.synth import random_network

DATA = Path(__file__).parent / "data"
FIXTURE_PROGRAM = DATA / "example21.mln"
FIXTURE_EVIDENCE = DATA / "example21.db"


def load_fixture():
    program = parse_program(FIXTURE_PROGRAM.read_text())
    evidence = parse_evidence(FIXTURE_EVIDENCE.read_text(), program)
    return program, evidence


@pytest.fixture(scope="session")
def fixture_program():
    return load_fixture()[0]


@pytest.fixture(scope="session")
def fixture_evidence():
    return load_fixture()[1]


@pytest.fixture(scope="session")
def net():
    return ground(*load_fixture())


def random_networks(count, seed=0, **kw):
    rng = random.Random(seed)
    for _ in range(count):
        yield random_network(rng, **kw)


def random_pb_model(rng, max_vars=20, max_rows=30):
    """Mostly feasible models: most rows are tight around a planted point."""
    from kbmap.pbsolver import PBModel
    model = PBModel()
    n = rng.randint(0, max_vars)
    for _ in range(n):
        model.add_var(rng.choice([round(rng.uniform(-5, 5), 3), float(rng.randint(-3, 3))]))
    planted = [rng.randint(0, 1) for _ in range(n)]
    if n:
        for _ in range(rng.randint(0, max_rows)):
            vs = rng.sample(range(n), rng.randint(1, min(n, 6)))
            if rng.random() < 0.3:
                terms = {v: 1 for v in vs}
            else:
                terms = {v: rng.randint(-3, 3) for v in vs}
            if rng.random() < 0.9:
                bound = sum(a * planted[v] for v, a in terms.items()) + rng.randint(0, 2)
            else:
                bound = rng.randint(-2, 4)
            model.add_constraint(terms, bound)
    return model


def enumerate_pb(model, eps=1e-9, chunk=1 << 16):
    """(value, lexicographically smallest optimal assignment), or None if infeasible."""
    import numpy as np
    n = model.num_vars
    A = np.zeros((len(model.constraints), n))
    for i, r in enumerate(model.constraints):
        for v, a in r.terms.items():
            A[i, v] = a
    b = np.array([r.bound for r in model.constraints], dtype=float)
    c = np.array([model.objective.get(v, 0.0) for v in range(n)])
    shifts = np.arange(n - 1, -1, -1)
    best, first = None, None
    for start in range(0, 2 ** n, chunk):
        idx = np.arange(start, min(start + chunk, 2 ** n), dtype=np.int64)
        # row i is the i-th assignment in lexicographic order (var 0 most significant)
        X = ((idx[:, None] >> shifts) & 1).astype(float)
        ok = (X @ A.T <= b + 0.5).all(axis=1)
        if not ok.any():
            continue
        values = X @ c
        top = values[ok].max()
        if best is None or top > best + eps:
            best = top
            first = None
        hits = np.flatnonzero(ok & (values >= best - eps))
        if first is None and len(hits):
            first = idx[hits[0]]
    if best is None:
        return None
    bits = tuple(int(first >> int(s)) & 1 for s in shifts)
    return model.evaluate(bits), bits
