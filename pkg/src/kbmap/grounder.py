"""Grounding of clause schemas against closed-world evidence.

Only groundings that can still be false survive: every observable and
equality literal must evaluate to false, so the enumeration is driven by a
join over the evidence tuples of the negated observable literals and then
filtered by the positive ones.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator

from .model import (
    HARD,
    Clause,
    Const,
    EqLiteral,
    EvidenceSet,
    GroundAtom,
    GroundClause,
    GroundNetwork,
    MlnProgram,
    PredLiteral,
    Var,
)

DEFAULT_HARD_WEIGHT = 10.0


def hidden_atoms(program: MlnProgram) -> list[GroundAtom]:
    """All typed groundings of hidden predicates, ordered by name then args."""
    sig = program.signature
    atoms = []
    for pred in sorted(sig.hidden_predicates, key=lambda p: p.name):
        domains = [sig.constants[t] for t in pred.arg_types]
        for args in sorted(itertools.product(*domains)):
            atoms.append(GroundAtom(len(atoms), pred.name, args))
    return atoms


def _value(term, binding):
    return term.name if isinstance(term, Const) else binding[term.name]


def _term_vars(lit) -> set[str]:
    terms = lit.args if isinstance(lit, PredLiteral) else (lit.left, lit.right)
    return {t.name for t in terms if isinstance(t, Var)}


def _falsifying_bindings(clause: Clause, program: MlnProgram,
                         evidence_by_pred: dict[str, list[tuple[str, ...]]],
                         evidence: set) -> Iterator[dict[str, str]]:
    """Substitutions under which no observable or equality literal is true."""
    sig = program.signature
    hidden = {p.name for p in sig.hidden_predicates}
    var_type: dict[str, str] = {}
    for lit in clause.literals:
        if isinstance(lit, PredLiteral):
            decl = sig.predicate(lit.predicate)
            for a, t in zip(lit.args, decl.arg_types):
                if isinstance(a, Var):
                    var_type[a.name] = t
    for lit in clause.literals:
        if isinstance(lit, EqLiteral):
            for a, b in ((lit.left, lit.right), (lit.right, lit.left)):
                if isinstance(a, Var) and a.name not in var_type:
                    var_type[a.name] = (sig.type_of_constant(b.name) if isinstance(b, Const)
                                        else var_type.get(b.name))

    joins = [l for l in clause.literals
             if isinstance(l, PredLiteral) and l.negated and l.predicate not in hidden]
    filters = [l for l in clause.literals
               if isinstance(l, EqLiteral) or (l.predicate not in hidden and not l.negated)]

    bound: set[str] = set()
    steps = []
    for lit in joins:
        bound |= _term_vars(lit)
        steps.append(("join", lit))
    for v in clause.variables():
        if v not in bound:
            bound.add(v)
            steps.append(("bind", v))
    # attach each filter to the first step after which it is ground
    checks: list[list] = [[] for _ in range(len(steps) + 1)]
    seen: set[str] = set()
    pending = list(filters)
    for i in range(len(steps) + 1):
        still = []
        for f in pending:
            if _term_vars(f) <= seen:
                checks[i].append(f)
            else:
                still.append(f)
        pending = still
        if i < len(steps):
            kind, item = steps[i]
            seen |= _term_vars(item) if kind == "join" else {item}

    def is_false(lit, binding) -> bool:
        if isinstance(lit, EqLiteral):
            equal = _value(lit.left, binding) == _value(lit.right, binding)
            return equal == lit.negated
        atom = (lit.predicate, tuple(_value(a, binding) for a in lit.args))
        return atom not in evidence  # positive observable literal

    def rec(i: int, binding: dict[str, str]):
        if not all(is_false(f, binding) for f in checks[i]):
            return
        if i == len(steps):
            yield dict(binding)
            return
        kind, item = steps[i]
        if kind == "bind":
            for c in sig.constants[var_type[item]]:
                binding[item] = c
                yield from rec(i + 1, binding)
            del binding[item]
            return
        for tup in evidence_by_pred.get(item.predicate, ()):
            added = []
            ok = True
            for a, c in zip(item.args, tup):
                if isinstance(a, Const):
                    ok = a.name == c
                elif a.name in binding:
                    ok = binding[a.name] == c
                else:
                    binding[a.name] = c
                    added.append(a.name)
                if not ok:
                    break
            if ok:
                yield from rec(i + 1, binding)
            for name in added:
                del binding[name]

    yield from rec(0, {})


def ground_literal_key(lit, binding):
    """Identity of a ground literal; equality is symmetric."""
    if isinstance(lit, EqLiteral):
        return (lit.negated, "=", frozenset((_value(lit.left, binding), _value(lit.right, binding))))
    return (lit.negated, lit.predicate, tuple(_value(a, binding) for a in lit.args))


def ground(program: MlnProgram, evidence: EvidenceSet,
           hard_weight: float = DEFAULT_HARD_WEIGHT) -> GroundNetwork:
    """Ground ``program`` under closed-world ``evidence``.

    Within one schema, substitutions producing the same set of ground
    literals denote the same ground formula and are kept once. Distinct
    ground formulae that simplify to the same hidden clause have their
    weights summed.
    """
    sig = program.signature
    hidden = {p.name for p in sig.hidden_predicates}
    atoms = hidden_atoms(program)
    atom_id = {(a.predicate, a.args): a.id for a in atoms}
    by_pred: dict[str, list[tuple[str, ...]]] = {}
    for p, args in sorted(evidence.true_atoms):
        by_pred.setdefault(p, []).append(args)
    ev = set(evidence.true_atoms)

    merged: dict[tuple[frozenset, frozenset], float] = {}
    for clause in program.clauses:
        w = hard_weight if clause.weight is HARD else float(clause.weight)
        hidden_lits = [l for l in clause.literals
                       if isinstance(l, PredLiteral) and l.predicate in hidden]
        seen_formulae = set()
        for binding in _falsifying_bindings(clause, program, by_pred, ev):
            key = frozenset(ground_literal_key(l, binding) for l in clause.literals)
            if key in seen_formulae:
                continue
            seen_formulae.add(key)
            pos, neg = set(), set()
            for lit in hidden_lits:
                h = atom_id[(lit.predicate, tuple(_value(a, binding) for a in lit.args))]
                (neg if lit.negated else pos).add(h)
            if pos & neg or not (pos or neg):
                continue
            k = (frozenset(pos), frozenset(neg))
            merged[k] = merged.get(k, 0.0) + w

    clauses = [GroundClause(pos, neg, w) for (pos, neg), w in merged.items()]
    return GroundNetwork.build(atoms, clauses)


def clauses_with_atom(network: GroundNetwork, h: int, polarity: str) -> list[int]:
    if h not in network.index_pos:
        raise KeyError(f"unknown atom id {h!r}")
    if polarity in ("positive", "pos", "+"):
        return list(network.index_pos[h])
    if polarity in ("negative", "neg", "-"):
        return list(network.index_neg[h])
    raise ValueError(f"polarity must be 'positive' or 'negative', not {polarity!r}")


def master_clauses(network: GroundNetwork, open_set: Iterable[int]) -> tuple[list[int], float]:
    """Split clauses for a master problem restricted to ``open_set``.

    Clauses with a negated closed atom hold in every state inside the open
    set; their weight is returned as a constant. Clauses whose only
    literals are positive closed atoms can never hold and are dropped.
    """
    open_set = frozenset(open_set)
    for h in open_set:
        if h not in network.index_pos:
            raise ValueError(f"unknown atom id {h!r}")
    included = []
    excluded_weight = 0.0
    for cid, c in enumerate(network.clauses):
        if not c.neg <= open_set:
            excluded_weight += c.weight
        elif c.neg or c.pos & open_set:
            included.append(cid)
    return included, excluded_weight


def dimension_summary(network: GroundNetwork) -> dict:
    unit = sum(1 for c in network.clauses if c.is_unit_positive)
    return {
        "atoms": network.num_atoms,
        "clauses": len(network.clauses),
        "unit_clauses": unit,
        "non_unit_clauses": len(network.clauses) - unit,
    }
