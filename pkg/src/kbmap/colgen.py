"""Delayed column generation for k-bounded MAP states.

Levels n = 1..k are solved in order. At each level the n-bounded master is
solved over the open atoms; then every closed atom h gets an optimality test:
the (n-1)-subproblem of h relative to all atoms bounds the gain of h on top
of any (n-1)-state, and if that bound does not exceed ``s_n - s_{n-1}`` no
n-state containing h can beat the current one. Atoms failing the test are
priced into the master and the level is re-solved; once nothing fails, the
level's score is certified optimal over all atoms and the next level starts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .encoder import encode_master, encode_subproblem, master_score, subproblem_upper_bound
from .grounder import DEFAULT_HARD_WEIGHT
from .model import EPS, GroundNetwork, State, empty_state_score, score_delta, world_score
from .pbsolver import solve

APRIORI = "apriori"
SUBVALUE = "subvalue"
PRICING = (APRIORI, SUBVALUE)


@dataclass(frozen=True)
class ColGenConfig:
    k: int
    m: int = 1
    pricing: str = APRIORI
    hard_weight: float = DEFAULT_HARD_WEIGHT
    tolerance: float = EPS
    # skip the subproblem ILP when its positive coefficients already pass the test
    screen: bool = True
    bound: str = "cardinality"
    backend: str = "auto"

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.pricing not in PRICING:
            raise ValueError(f"pricing must be one of {PRICING}")


@dataclass
class IterationStats:
    n: int
    score: float
    state: tuple[int, ...]
    open_atoms: int
    master_cols: int
    master_rows: int
    tested: int
    screened: int
    subproblems: int
    sub_cols: int
    sub_rows: int
    failed: tuple[int, ...]
    priced: tuple[int, ...]
    seconds: float


@dataclass
class ColGenRun:
    open: list[int] = field(default_factory=list)
    closed: set[int] = field(default_factory=set)
    scores: list[float] = field(default_factory=list)
    initial_pricing: tuple[int, ...] = ()
    iterations: list[IterationStats] = field(default_factory=list)

    @property
    def pricing_order(self) -> list[int]:
        order = list(self.initial_pricing)
        for it in self.iterations:
            order.extend(it.priced)
        return order


@dataclass
class KBoundedResult:
    state: State
    score: float
    per_level: list[tuple[int, float, State]]
    run: ColGenRun
    certified: list[bool]
    naive: bool = False

    @property
    def final_master_dims(self) -> tuple[int, int]:
        if not self.run.iterations:
            return 0, 0
        last = self.run.iterations[-1]
        return last.master_cols, last.master_rows

    @property
    def seconds(self) -> float:
        return sum(it.seconds for it in self.run.iterations)

    def to_trace(self, network: GroundNetwork) -> dict:
        names = network.atom_name
        levels = []
        for n, s, st in self.per_level:
            its = [it for it in self.run.iterations if it.n == n]
            cols, rows = (its[-1].master_cols, its[-1].master_rows) if its else (0, 0)
            levels.append({
                "n": n,
                "score": s,
                "state": sorted(names(h) for h in st.active),
                "master": {"cols": cols, "rows": rows},
                "subproblems": {
                    "count": sum(it.subproblems for it in its),
                    "screened": sum(it.screened for it in its),
                    "cols": sum(it.sub_cols for it in its),
                    "rows": sum(it.sub_rows for it in its),
                },
                "iterations": len(its),
                "seconds": sum(it.seconds for it in its),
            })
        return {
            "method": "naive" if self.naive else "colgen",
            "levels": levels,
            "pricing": [names(h) for h in self.run.pricing_order],
            "iterations": [{
                "n": it.n,
                "score": it.score,
                "state": sorted(names(h) for h in it.state),
                "open": it.open_atoms,
                "master": {"cols": it.master_cols, "rows": it.master_rows},
                "subproblems": {"count": it.subproblems, "screened": it.screened,
                                "cols": it.sub_cols, "rows": it.sub_rows},
                "failed": [names(h) for h in it.failed],
                "priced": [names(h) for h in it.priced],
                "seconds": it.seconds,
            } for it in self.run.iterations],
            "result": {"state": sorted(names(h) for h in self.state.active), "score": self.score},
        }


def price_atoms(network: GroundNetwork, candidates: Iterable[int], m: int, strategy: str,
                subvalues: Mapping[int, float] | None = None) -> list[int]:
    """The ``m`` best candidates by a-priori weight or subproblem value; ties by id."""
    if strategy == APRIORI:
        key = network.apriori_weight
    elif strategy == SUBVALUE:
        if subvalues is None:
            raise ValueError("subproblem pricing needs subproblem values")
        key = subvalues
    else:
        raise ValueError(f"unknown pricing strategy {strategy!r}")
    ranked = sorted(candidates, key=lambda h: (-key[h], h))
    return ranked[:m]


def solve_k_bounded(network: GroundNetwork, config: ColGenConfig) -> KBoundedResult:
    k, m, tol = config.k, config.m, config.tolerance
    all_atoms = list(network.atom_ids)
    run = ColGenRun(closed=set(all_atoms))
    s_prev = empty_state_score(network)
    run.scores.append(s_prev)
    per_level = [(0, s_prev, State())]
    certified = [True]
    incumbent = State()

    if k == 0 or not all_atoms:
        return KBoundedResult(State(), s_prev, per_level, run, certified)

    if config.pricing == SUBVALUE:
        # the 0-subproblem optimum is the gain over the empty state
        initial = {h: score_delta(network, State(), h) for h in all_atoms}
    else:
        initial = None
    first = price_atoms(network, run.closed, m, config.pricing, initial)
    run.initial_pricing = tuple(first)
    _open(run, first)

    everything = frozenset(all_atoms)
    # both depend on h and the level only, not on the open set
    screen_bound: dict[int, float] = {}
    sub_value: dict[tuple[int, int], tuple[float, int, int]] = {}
    n = 1
    while n <= k:
        t0 = time.perf_counter()
        enc = encode_master(network, run.open, n)
        sol = solve(enc.model, hint=enc.hint(network, incumbent), bound=config.bound,
                    backend=config.backend)
        state, _ = master_score(enc, sol)
        # rescored so that equal states report bit-identical scores
        s_n = world_score(network, state)
        incumbent = state
        gap = s_n - s_prev

        tested = sorted(run.closed)
        failed: dict[int, float] = {}
        screened = subs = sub_cols = sub_rows = 0
        for h in tested:
            if config.screen:
                if h not in screen_bound:
                    screen_bound[h] = subproblem_upper_bound(network, everything, h)
                if screen_bound[h] <= gap + tol:
                    screened += 1
                    continue
            if (h, n) not in sub_value:
                sub = encode_subproblem(network, everything, h, n - 1)
                o = solve(sub.model, bound=config.bound, backend=config.backend).value
                sub_value[h, n] = (o, sub.model.num_vars, sub.model.num_rows)
            o_h, cols, rows = sub_value[h, n]
            subs += 1
            sub_cols += cols
            sub_rows += rows
            if o_h > gap + tol:
                failed[h] = o_h

        priced: list[int] = []
        if failed:
            priced = price_atoms(network, failed, m, config.pricing, failed)
            _open(run, priced)
        run.iterations.append(IterationStats(
            n=n, score=s_n, state=tuple(sorted(state.active)), open_atoms=len(enc.var_of_atom),
            master_cols=enc.model.num_vars, master_rows=enc.model.num_rows,
            tested=len(tested), screened=screened, subproblems=subs,
            sub_cols=sub_cols, sub_rows=sub_rows, failed=tuple(sorted(failed)),
            priced=tuple(priced), seconds=time.perf_counter() - t0,
        ))
        if not failed:
            per_level.append((n, s_n, state))
            certified.append(True)
            run.scores.append(s_n)
            s_prev = s_n
            n += 1

    final_n, final_s, final_state = per_level[-1]
    return KBoundedResult(final_state, final_s, per_level, run, certified)


def _open(run: ColGenRun, atoms: list[int]):
    for h in atoms:
        run.closed.discard(h)
        run.open.append(h)


def solve_naive(network: GroundNetwork, k: int, bound: str = "cardinality",
                backend: str = "auto") -> KBoundedResult:
    """One master over all atoms with the cardinality row ``<= k``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    t0 = time.perf_counter()
    all_atoms = list(network.atom_ids)
    enc = encode_master(network, all_atoms, k)
    sol = solve(enc.model, bound=bound, backend=backend)
    state, _ = master_score(enc, sol)
    s = world_score(network, state)
    run = ColGenRun(open=all_atoms, closed=set())
    run.scores.append(s)
    run.iterations.append(IterationStats(
        n=k, score=s, state=tuple(sorted(state.active)), open_atoms=len(all_atoms),
        master_cols=enc.model.num_vars, master_rows=enc.model.num_rows,
        tested=0, screened=0, subproblems=0, sub_cols=0, sub_rows=0,
        failed=(), priced=(), seconds=time.perf_counter() - t0,
    ))
    return KBoundedResult(state, s, [(k, s, state)], run, [True], naive=True)
