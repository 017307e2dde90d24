"""Core types for MLN programs, ground networks and states, plus scoring.

A ground network only keeps clauses over hidden atoms; clauses that the
evidence already makes true or false are dropped during grounding, so every
score in this package is relative to that simplified network.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

# Absolute tolerance for every comparison between real-valued scores.
EPS = 1e-9


class InvalidStateError(ValueError):
    """A state refers to atom ids that do not exist in the network."""


class _Hard:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "HARD"

    def __reduce__(self):
        return (_Hard, ())


HARD = _Hard()
Weight = Union[float, _Hard]


# --------------------------------------------------------------------------
# first-order program
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    arg_types: tuple[str, ...]
    hidden: bool

    @property
    def arity(self) -> int:
        return len(self.arg_types)


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


Term = Union[Var, Const]


@dataclass(frozen=True)
class PredLiteral:
    predicate: str
    args: tuple[Term, ...]
    negated: bool = False


@dataclass(frozen=True)
class EqLiteral:
    left: Term
    right: Term
    negated: bool = False


Literal = Union[PredLiteral, EqLiteral]


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, ...]
    weight: Weight

    def variables(self) -> list[str]:
        """Variable names in order of first occurrence."""
        seen: dict[str, None] = {}
        for lit in self.literals:
            terms = lit.args if isinstance(lit, PredLiteral) else (lit.left, lit.right)
            for t in terms:
                if isinstance(t, Var):
                    seen.setdefault(t.name, None)
        return list(seen)


@dataclass(frozen=True)
class Signature:
    constants: Mapping[str, tuple[str, ...]]
    predicates: tuple[PredicateDecl, ...]

    @property
    def types(self) -> frozenset[str]:
        return frozenset(self.constants)

    def predicate(self, name: str) -> PredicateDecl:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def type_of_constant(self, name: str) -> str | None:
        for t, consts in self.constants.items():
            if name in consts:
                return t
        return None

    @property
    def hidden_predicates(self) -> tuple[PredicateDecl, ...]:
        return tuple(p for p in self.predicates if p.hidden)

    @property
    def observable_predicates(self) -> tuple[PredicateDecl, ...]:
        return tuple(p for p in self.predicates if not p.hidden)


@dataclass(frozen=True)
class MlnProgram:
    signature: Signature
    clauses: tuple[Clause, ...]


@dataclass(frozen=True)
class EvidenceSet:
    true_atoms: frozenset[tuple[str, tuple[str, ...]]]

    def __len__(self):
        return len(self.true_atoms)

    def __contains__(self, atom):
        return atom in self.true_atoms


# --------------------------------------------------------------------------
# ground network
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GroundAtom:
    id: int
    predicate: str
    args: tuple[str, ...]

    def __str__(self):
        return f"{self.predicate}({','.join(self.args)})"


@dataclass(frozen=True)
class GroundClause:
    pos: frozenset[int]
    neg: frozenset[int]
    weight: float

    def __post_init__(self):
        if self.pos & self.neg:
            raise ValueError("ground clause is a tautology")
        if not (self.pos or self.neg):
            raise ValueError("ground clause is empty")

    def satisfied_by(self, active) -> bool:
        return any(a in active for a in self.pos) or any(a not in active for a in self.neg)

    @property
    def is_unit_positive(self) -> bool:
        return len(self.pos) == 1 and not self.neg


@dataclass(frozen=True)
class GroundNetwork:
    """Evidence-simplified ground clauses over hidden atoms.

    Build instances with :meth:`build`, which derives the polarity indexes
    and a-priori weights from the clause list.
    """

    hidden_atoms: tuple[GroundAtom, ...]
    clauses: tuple[GroundClause, ...]
    index_pos: Mapping[int, tuple[int, ...]] = field(repr=False)
    index_neg: Mapping[int, tuple[int, ...]] = field(repr=False)
    apriori_weight: Mapping[int, float] = field(repr=False)

    @classmethod
    def build(cls, atoms: Iterable[GroundAtom], clauses: Iterable[GroundClause]) -> "GroundNetwork":
        atoms = tuple(atoms)
        clauses = tuple(clauses)
        for i, a in enumerate(atoms):
            if a.id != i:
                raise ValueError("atom ids must be dense and in order")
        pos: dict[int, list[int]] = {a.id: [] for a in atoms}
        neg: dict[int, list[int]] = {a.id: [] for a in atoms}
        apriori = {a.id: 0.0 for a in atoms}
        for cid, c in enumerate(clauses):
            for h in sorted(c.pos):
                if h not in pos:
                    raise ValueError(f"clause {cid} mentions unknown atom {h}")
                pos[h].append(cid)
            for h in sorted(c.neg):
                if h not in neg:
                    raise ValueError(f"clause {cid} mentions unknown atom {h}")
                neg[h].append(cid)
            if c.is_unit_positive:
                (h,) = c.pos
                apriori[h] += c.weight
        return cls(
            hidden_atoms=atoms,
            clauses=clauses,
            index_pos={h: tuple(v) for h, v in pos.items()},
            index_neg={h: tuple(v) for h, v in neg.items()},
            apriori_weight=apriori,
        )

    @classmethod
    def from_clauses(cls, num_atoms: int, clauses: Iterable[GroundClause]) -> "GroundNetwork":
        """Network over anonymous atoms ``h0 .. h{n-1}``."""
        atoms = [GroundAtom(i, "h", (str(i),)) for i in range(num_atoms)]
        return cls.build(atoms, clauses)

    @property
    def num_atoms(self) -> int:
        return len(self.hidden_atoms)

    @property
    def atom_ids(self) -> range:
        return range(len(self.hidden_atoms))

    def atom_name(self, h: int) -> str:
        return str(self.hidden_atoms[h])

    def atom_id(self, name: str) -> int:
        """Look up an atom by its printed form, e.g. ``map(a1,a2)``."""
        key = name.replace(" ", "")
        for a in self.hidden_atoms:
            if str(a) == key:
                return a.id
        raise KeyError(name)

    def state(self, names: Iterable[str]) -> "State":
        return State(frozenset(self.atom_id(n) for n in names))


@dataclass(frozen=True)
class State:
    active: frozenset[int] = frozenset()

    def __len__(self):
        return len(self.active)

    def __contains__(self, h):
        return h in self.active

    def with_atom(self, h: int) -> "State":
        return State(self.active | {h})


def _check_state(network: GroundNetwork, state: State) -> None:
    n = network.num_atoms
    for h in state.active:
        if not (isinstance(h, int) and 0 <= h < n):
            raise InvalidStateError(f"unknown atom id {h!r}")


# --------------------------------------------------------------------------
# scores
# --------------------------------------------------------------------------


def world_score(network: GroundNetwork, state: State) -> float:
    """Summed weight of the ground clauses satisfied by ``state``.

    Starts from the empty-state score and only visits clauses that mention an
    active atom.
    """
    _check_state(network, state)
    active = state.active
    total = empty_state_score(network)
    touched: set[int] = set()
    for h in active:
        touched.update(network.index_pos[h])
        touched.update(network.index_neg[h])
    for cid in sorted(touched):
        c = network.clauses[cid]
        before = bool(c.neg)
        after = c.satisfied_by(active)
        if after and not before:
            total += c.weight
        elif before and not after:
            total -= c.weight
    return total


def empty_state_score(network: GroundNetwork) -> float:
    return sum(c.weight for c in network.clauses if c.neg)


def score_delta(network: GroundNetwork, state: State, h: int) -> float:
    """Score change from activating ``h`` on top of ``state``.

    Only the clauses in which ``h`` occurs can change truth value.
    """
    _check_state(network, state)
    if not (isinstance(h, int) and 0 <= h < network.num_atoms):
        raise InvalidStateError(f"unknown atom id {h!r}")
    if h in state.active:
        raise ValueError(f"atom {h} is already active")
    active = state.active
    after = active | {h}
    delta = 0.0
    # h positive: newly satisfied unless some other literal already was
    for cid in network.index_pos[h]:
        c = network.clauses[cid]
        if not c.satisfied_by(active):
            delta += c.weight
    # h negative: newly falsified when it was the only true literal
    for cid in network.index_neg[h]:
        c = network.clauses[cid]
        if c.satisfied_by(active) and not c.satisfied_by(after):
            delta -= c.weight
    return delta
