"""Exact 0-1 linear maximization by depth-first branch-and-bound.

Constraints are integer ``sum(a_i * x_i) <= b`` rows. Each node runs
slack-based propagation (a variable whose coefficient exceeds the row slack
is forced to the value that keeps the row satisfiable), which generalizes
unit propagation to cardinality and pseudo-Boolean rows.

The upper bound is the fixed objective plus the positive coefficients of the
free variables. With ``bound="cardinality"`` (the default) it is tightened
on a disjoint family of at-most-``b`` rows with unit coefficients: only the
``slack`` best free positive variables in such a row can still be set.

Large models can instead go to HiGHS (through scipy) with ``backend``; its
answers are rounded and re-checked against the integer rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .model import EPS

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

BOUNDS = ("simple", "cardinality", "lp")
BACKENDS = ("bnb", "highs", "auto")
# above this many variables "auto" prefers HiGHS
AUTO_THRESHOLD = 100


@dataclass
class Constraint:
    terms: dict[int, int]
    bound: int

    def activity(self, assignment: Sequence[int]) -> int:
        return sum(a * assignment[v] for v, a in self.terms.items())

    def satisfied_by(self, assignment: Sequence[int]) -> bool:
        return self.activity(assignment) <= self.bound


@dataclass
class PBModel:
    """Maximize ``constant_term + sum(objective[v] * x_v)`` over binary x."""

    num_vars: int = 0
    objective: dict[int, float] = field(default_factory=dict)
    constant_term: float = 0.0
    constraints: list[Constraint] = field(default_factory=list)
    var_labels: dict[int, str] = field(default_factory=dict)

    def add_var(self, coef: float = 0.0, label: str | None = None) -> int:
        v = self.num_vars
        self.num_vars += 1
        if coef:
            self.objective[v] = float(coef)
        if label is not None:
            self.var_labels[v] = label
        return v

    def add_constraint(self, terms: Mapping[int, int], bound: int) -> Constraint:
        clean: dict[int, int] = {}
        for v, a in terms.items():
            if not (0 <= v < self.num_vars):
                raise ValueError(f"variable {v} out of range")
            if int(a) != a:
                raise ValueError("constraint coefficients must be integers")
            if a:
                clean[v] = clean.get(v, 0) + int(a)
        if int(bound) != bound:
            raise ValueError("constraint bounds must be integers")
        row = Constraint(clean, int(bound))
        self.constraints.append(row)
        return row

    @property
    def num_rows(self) -> int:
        return len(self.constraints)

    def evaluate(self, assignment: Sequence[int]) -> float:
        return self.constant_term + math.fsum(c * assignment[v] for v, c in sorted(self.objective.items()))

    def is_feasible(self, assignment: Sequence[int]) -> bool:
        return all(r.satisfied_by(assignment) for r in self.constraints)

    def label(self, v: int) -> str:
        return self.var_labels.get(v, f"x{v}")


@dataclass(frozen=True)
class PBSolution:
    assignment: tuple[int, ...]
    value: float
    status: str
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _lex_smaller(a: Sequence[int], b: Sequence[int]) -> bool:
    return tuple(a) < tuple(b)


def solve(model: PBModel, hint: Sequence[int] | None = None, bound: str = "cardinality",
          backend: str = "bnb") -> PBSolution:
    """Return an optimal assignment, or an infeasible status.

    With the built-in search (``backend="bnb"``) the lexicographically
    smallest bit vector wins among assignments whose values agree within
    ``EPS``. ``hint`` is an optional feasible assignment used as the first
    incumbent; it does not change the result.

    ``backend="highs"`` hands the model to the HiGHS MIP solver with a zero
    relative gap; the returned assignment is optimal but ties are broken by
    HiGHS. ``"auto"`` uses HiGHS for models above ``AUTO_THRESHOLD``
    variables when scipy is importable, and the built-in search otherwise.
    """
    if bound not in BOUNDS:
        raise ValueError(f"unknown bound {bound!r}; choose from {BOUNDS}")
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    if backend == "auto":
        backend = "highs" if model.num_vars > AUTO_THRESHOLD and _have_highs() else "bnb"
    if backend == "highs":
        sol = _solve_highs(model)
        if sol is not None:
            return sol
    if bound == "lp":
        raise NotImplementedError("LP-relaxation bound is not implemented")
    return _Search(model, bound == "cardinality").run(hint)


def _have_highs() -> bool:
    try:
        import scipy.optimize  # noqa: F401
    except ImportError:
        return False
    return hasattr(scipy.optimize, "milp")


def _solve_highs(model: PBModel) -> PBSolution | None:
    """Solve with HiGHS; None if the rounded answer fails the exact row check."""
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_array

    n = model.num_vars
    if n == 0 or not model.constraints:
        return None
    c = np.zeros(n)
    for v, w in model.objective.items():
        c[v] = -w
    rows, cols, data, rhs = [], [], [], []
    for i, r in enumerate(model.constraints):
        for v, a in r.terms.items():
            rows.append(i)
            cols.append(v)
            data.append(a)
        rhs.append(r.bound)
    A = coo_array((data, (rows, cols)), shape=(len(rhs), n)).tocsr()
    res = milp(c, integrality=np.ones(n), bounds=Bounds(0, 1),
               constraints=LinearConstraint(A, -np.inf, np.asarray(rhs, dtype=float)),
               options={"mip_rel_gap": 0.0})
    if res.status == 2:
        return PBSolution((), 0.0, INFEASIBLE, 0)
    if res.status != 0 or res.x is None:
        raise RuntimeError(f"HiGHS stopped without an optimum: {res.message}")
    x = tuple(int(round(v)) for v in res.x)
    if not model.is_feasible(x):
        return None
    return PBSolution(x, model.evaluate(x), OPTIMAL, 0)


class _Search:
    def __init__(self, model: PBModel, use_card: bool):
        n = model.num_vars
        self.model = model
        self.n = n
        self.c = [float(model.objective.get(v, 0.0)) for v in range(n)]
        self.rows: list[list[tuple[int, int]]] = []
        self.rhs: list[int] = []
        self.var_rows: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        self.trivially_infeasible = False
        for r in model.constraints:
            terms = sorted((v, a) for v, a in r.terms.items() if a)
            if not terms:
                if r.bound < 0:
                    self.trivially_infeasible = True
                continue
            ri = len(self.rows)
            self.rows.append(terms)
            self.rhs.append(r.bound)
            for v, a in terms:
                self.var_rows[v].append((ri, a))
        self.rowmax = [max(abs(a) for _, a in terms) for terms in self.rows]
        self.card_rows = self._pick_card_rows() if use_card else []

    def _pick_card_rows(self):
        c = self.c
        cands = []
        for ri, terms in enumerate(self.rows):
            if all(a == 1 for _, a in terms):
                npos = sum(1 for v, _ in terms if c[v] > 0)
                excess = npos - self.rhs[ri]
                if excess > 0 and npos > 1:
                    cands.append((-excess, ri))
        cands.sort()
        used: set[int] = set()
        chosen = []
        for _, ri in cands:
            vs = {v for v, _ in self.rows[ri]}
            if vs & used:
                continue
            used |= vs
            chosen.append(ri)
        return chosen

    def run(self, hint) -> PBSolution:
        n = self.n
        c = self.c
        rows, rhs, var_rows, rowmax = self.rows, self.rhs, self.var_rows, self.rowmax
        if self.trivially_infeasible:
            return PBSolution((), 0.0, INFEASIBLE, 0)

        val = [-1] * n
        minact = [sum(a for _, a in terms if a < 0) for terms in rows]
        trail: list[int] = []
        # acc[0]: objective of vars fixed to one, acc[1]: positive mass of free vars
        acc = [0.0, sum(x for x in c if x > 0)]

        card_rows = self.card_rows
        card_of = [-1] * n
        card_sorted = []
        card_pos = []
        card_cnt = []
        for k, ri in enumerate(card_rows):
            vs = sorted((v for v, _ in rows[ri] if c[v] > 0), key=lambda v: (-c[v], v))
            for v, _ in rows[ri]:
                card_of[v] = k
            card_sorted.append(vs)
            card_pos.append(sum(c[v] for v in vs))
            card_cnt.append(len(vs))

        queue: list[int] = []

        def assign(v: int, x: int) -> bool:
            val[v] = x
            trail.append(v)
            cv = c[v]
            if cv > 0:
                acc[1] -= cv
                k = card_of[v]
                if k >= 0:
                    card_pos[k] -= cv
                    card_cnt[k] -= 1
            if x:
                acc[0] += cv
            ok = True
            for r, a in var_rows[v]:
                if (a > 0) == (x == 1):
                    minact[r] += a if a > 0 else -a
                    slack = rhs[r] - minact[r]
                    if slack < 0:
                        ok = False
                    elif slack < rowmax[r]:
                        queue.append(r)
            return ok

        def undo(length: int):
            while len(trail) > length:
                v = trail.pop()
                x = val[v]
                val[v] = -1
                cv = c[v]
                if cv > 0:
                    acc[1] += cv
                    k = card_of[v]
                    if k >= 0:
                        card_pos[k] += cv
                        card_cnt[k] += 1
                if x:
                    acc[0] -= cv
                for r, a in var_rows[v]:
                    if (a > 0) == (x == 1):
                        minact[r] -= a if a > 0 else -a

        def propagate() -> bool:
            while queue:
                r = queue.pop()
                slack = rhs[r] - minact[r]
                if slack < 0:
                    queue.clear()
                    return False
                for v, a in rows[r]:
                    if val[v] == -1 and (a if a > 0 else -a) > slack:
                        if not assign(v, 0 if a > 0 else 1):
                            queue.clear()
                            return False
            return True

        def upper_bound() -> float:
            ub = acc[0] + acc[1]
            for k, ri in enumerate(card_rows):
                slack = rhs[ri] - minact[ri]
                if slack >= card_cnt[k]:
                    continue
                top = 0.0
                taken = 0
                if slack > 0:
                    for v in card_sorted[k]:
                        if val[v] == -1:
                            top += c[v]
                            taken += 1
                            if taken == slack:
                                break
                ub -= card_pos[k] - top
            return ub

        best: list[int] | None = None
        best_val = -math.inf
        if hint is not None and len(hint) == n and all(x in (0, 1) for x in hint) \
                and self.model.is_feasible(hint):
            best = list(hint)
            best_val = self.model.evaluate(best)

        def lex_possible() -> bool:
            # can the subtree contain an assignment lexicographically below best?
            for i in range(n):
                vi = val[i]
                if best[i] == 1:
                    if vi != 1:
                        return True
                elif vi == 1:
                    return False
            return False

        def branch(v: int, x: int) -> bool:
            # bound before propagating: most refuted branches die here cheaply
            ok = assign(v, x)
            if ok and best is not None and upper_bound() < best_val - EPS:
                ok = False
            ok = ok and propagate()
            if not ok:
                queue.clear()
            return ok

        order = sorted(range(n), key=lambda v: (-abs(c[v]), v))
        nodes = 0

        # root: propagate every row once
        queue.extend(range(len(rows)))
        root_ok = all(rhs[r] - minact[r] >= 0 for r in range(len(rows))) and propagate()
        if not root_ok:
            return PBSolution((), 0.0, INFEASIBLE, 1)

        stack: list[list] = []
        pos = 0
        consistent = True
        while True:
            if consistent:
                nodes += 1
                if best is not None:
                    ub = upper_bound()
                    if ub < best_val - EPS:
                        consistent = False
                    elif ub <= best_val + EPS and not lex_possible():
                        consistent = False
            if consistent:
                while pos < n and val[order[pos]] != -1:
                    pos += 1
                if pos == n:
                    value = self.model.constant_term + math.fsum(c[v] for v in range(n) if val[v])
                    if best is None or value > best_val + EPS or (
                            value >= best_val - EPS and _lex_smaller(val, best)):
                        best = list(val)
                        best_val = value
                    consistent = False
                else:
                    v = order[pos]
                    first = 1 if c[v] > 0 else 0
                    stack.append([v, len(trail), pos, 1 - first])
                    consistent = branch(v, first)
                    continue
            # backtrack to the deepest decision with an untried value
            while stack:
                frame = stack.pop()
                v, tl, p, alt = frame
                undo(tl)
                if alt is not None:
                    stack.append([v, tl, p, None])
                    pos = p
                    consistent = branch(v, alt)
                    break
            else:
                break

        if best is None:
            return PBSolution((), 0.0, INFEASIBLE, nodes)
        return PBSolution(tuple(best), self.model.evaluate(best), OPTIMAL, nodes)


def export_lp(model: PBModel) -> str:
    """CPLEX LP text: objective, rows in model order, then the binaries.

    A nonzero constant term is carried by a variable ``constant`` fixed to 1.
    """
    names = [_lp_name(model, v) for v in range(model.num_vars)]
    use_const = bool(model.constant_term) or not names
    filler = f"0 {names[0]}" if names else "0 constant"
    obj = _lp_expr(dict(sorted(model.objective.items())), names, real=True)
    if model.constant_term:
        k = model.constant_term
        term = f"{abs(k)!r} constant"
        obj = f"{obj} {'-' if k < 0 else '+'} {term}" if obj else ("-" if k < 0 else "") + term
    lines = ["\\ 0-1 model", "Maximize", f" obj: {obj or filler}", "Subject To"]
    for i, r in enumerate(model.constraints):
        expr = _lp_expr(dict(sorted(r.terms.items())), names, real=False)
        lines.append(f" c{i}: {expr or filler} <= {r.bound}")
    if use_const:
        lines += ["Bounds", " constant = 1"]
    lines.append("Binaries")
    if names:
        lines.append(" " + " ".join(names))
    lines.append("End")
    return "\n".join(lines) + "\n"


def _lp_name(model: PBModel, v: int) -> str:
    label = model.var_labels.get(v)
    if not label:
        return f"x{v}"
    safe = "".join(ch if ch.isalnum() or ch == "_" else "_" for ch in label)
    return f"x{v}_{safe}".rstrip("_")


def _lp_expr(terms, names, real: bool) -> str:
    parts = []
    for v, a in terms.items():
        if not a:
            continue
        coef = repr(float(a)) if real else str(int(a))
        sign = "-" if a < 0 else "+"
        mag = coef.lstrip("-")
        if not parts:
            parts.append(f"{'-' if a < 0 else ''}{mag} {names[v]}")
        else:
            parts.append(f"{sign} {mag} {names[v]}")
    return " ".join(parts)
