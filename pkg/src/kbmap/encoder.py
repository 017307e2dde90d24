"""0-1 models for the restricted master problem and the pricing subproblems.

Master: one variable per open atom plus one auxiliary variable per
non-unit clause that is forced to equal the clause's truth value. Unit
positive clauses are folded into the atom's objective coefficient.

Subproblem of ``h``: the best score change from adding ``h`` to some set of
at most ``k`` open atoms. A clause with ``h`` positive gains its weight when
the rest of the clause is false; a clause with ``h`` negative loses its
weight under the same condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .grounder import master_clauses
from .model import GroundNetwork, State
from .pbsolver import PBModel, PBSolution


@dataclass
class MasterEncoding:
    model: PBModel
    atom_of_var: dict[int, int]
    var_of_atom: dict[int, int]
    aux_of_clause: dict[int, int]
    excluded_weight: float
    k: int

    def hint(self, network: GroundNetwork, state: State) -> list[int]:
        """Feasible assignment encoding ``state``; ``state`` must fit in the model."""
        x = [0] * self.model.num_vars
        for h in state.active:
            x[self.var_of_atom[h]] = 1
        for cid, y in self.aux_of_clause.items():
            x[y] = int(network.clauses[cid].satisfied_by(state.active))
        return x


@dataclass
class SubproblemEncoding:
    model: PBModel
    h: int
    open_atom_vars: dict[int, int]
    aux_vars: list[int] = field(default_factory=list)


def _check_atoms(network: GroundNetwork, atoms: Iterable[int]):
    n = network.num_atoms
    for h in atoms:
        if not (isinstance(h, int) and 0 <= h < n):
            raise ValueError(f"{h!r} is not a hidden atom id")


def encode_master(network: GroundNetwork, open_set: Iterable[int], k: int) -> MasterEncoding:
    open_set = frozenset(open_set)
    _check_atoms(network, open_set)
    if k < 0:
        raise ValueError("k must be non-negative")
    model = PBModel()
    var_of_atom = {}
    for h in sorted(open_set):
        var_of_atom[h] = model.add_var(0.0, network.atom_name(h))
    included, excluded_weight = master_clauses(network, open_set)

    aux_of_clause = {}
    for cid in included:
        c = network.clauses[cid]
        pos = sorted(c.pos & open_set)
        neg = sorted(c.neg)
        if len(pos) == 1 and not neg:
            v = var_of_atom[pos[0]]
            model.objective[v] = model.objective.get(v, 0.0) + c.weight
            continue
        y = model.add_var(c.weight, f"clause{cid}")
        aux_of_clause[cid] = y
        # y = 1 iff some positive atom is on or some negated atom is off
        for p in pos:
            model.add_constraint({var_of_atom[p]: 1, y: -1}, 0)
        for q in neg:
            model.add_constraint({var_of_atom[q]: -1, y: -1}, -1)
        row = {y: 1}
        for p in pos:
            row[var_of_atom[p]] = -1
        for q in neg:
            row[var_of_atom[q]] = 1
        model.add_constraint(row, len(neg))
    if k < len(open_set):
        model.add_constraint({v: 1 for v in var_of_atom.values()}, k)
    return MasterEncoding(
        model=model,
        atom_of_var={v: h for h, v in var_of_atom.items()},
        var_of_atom=var_of_atom,
        aux_of_clause=aux_of_clause,
        excluded_weight=excluded_weight,
        k=k,
    )


def master_score(encoding: MasterEncoding, solution: PBSolution) -> tuple[State, float]:
    """Decode the active atoms and add back the weight of excluded clauses."""
    if not solution.optimal:
        raise ValueError(f"master problem has no solution (status {solution.status})")
    active = frozenset(h for v, h in encoding.atom_of_var.items() if solution.assignment[v])
    return State(active), solution.value + encoding.excluded_weight


def subproblem_terms(network: GroundNetwork, open_set: frozenset[int], h: int):
    """Clauses that can change truth value when ``h`` is added to a subset of ``open_set``.

    Yields ``(clause id, signed weight, positive atoms, negated atoms)`` of the
    clause with ``h`` removed. Closed positive atoms are dropped (they are
    false); a clause with a closed negated atom is always satisfied and is
    skipped.
    """
    others = open_set - {h}
    for cid in network.index_pos[h]:
        c = network.clauses[cid]
        if c.neg <= others:
            yield cid, c.weight, sorted((c.pos - {h}) & others), sorted(c.neg)
    for cid in network.index_neg[h]:
        c = network.clauses[cid]
        rest = c.neg - {h}
        if rest <= others:
            yield cid, -c.weight, sorted(c.pos & others), sorted(rest)


def encode_subproblem(network: GroundNetwork, open_set: Iterable[int], h: int, k: int) -> SubproblemEncoding:
    _check_atoms(network, [h])
    open_set = frozenset(open_set)
    _check_atoms(network, open_set)
    if k < 0:
        raise ValueError("k must be non-negative")
    terms = list(subproblem_terms(network, open_set, h))

    model = PBModel()
    atoms = sorted({a for _, _, pos, neg in terms for a in (*pos, *neg)})
    atom_vars = {a: model.add_var(0.0, network.atom_name(a)) for a in atoms}
    aux = []
    for cid, coef, pos, neg in terms:
        x = model.add_var(coef, f"clause{cid}")
        aux.append(x)
        if not pos and not neg:
            # the reduced clause is empty, hence false: x must be 1
            if coef < 0:
                model.add_constraint({x: -1}, -1)
            continue
        # x = 1 iff every positive atom is off and every negated atom is on
        for p in pos:
            model.add_constraint({x: 1, atom_vars[p]: 1}, 1)
        for q in neg:
            model.add_constraint({x: 1, atom_vars[q]: -1}, 0)
        row = {x: -1}
        for p in pos:
            row[atom_vars[p]] = -1
        for q in neg:
            row[atom_vars[q]] = 1
        model.add_constraint(row, len(neg) - 1)
    if k < len(atom_vars):
        model.add_constraint({v: 1 for v in atom_vars.values()}, k)
    return SubproblemEncoding(model=model, h=h, open_atom_vars=atom_vars, aux_vars=aux)


def subproblem_upper_bound(network: GroundNetwork, open_set: frozenset[int], h: int) -> float:
    """Sum of the positive objective coefficients of the subproblem of ``h``."""
    return sum(w for _, w, _, _ in subproblem_terms(network, open_set, h) if w > 0)
