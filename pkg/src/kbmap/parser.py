"""Reader and printer for the MLN program text format and evidence files.

Program files are line oriented, ``#`` starts a comment::

    type C1: a1, b1, c1
    observable sub1(C1, C1)
    hidden map(C1, C2)
    hard !map(x,y) v !map(x,z) v y = z
    0.95 map(a1,a2)

Identifiers that are declared constants are constants; any other identifier
starting with a lowercase letter in a term position is a variable.
Declarations may appear anywhere in the file; clauses are checked after all
declarations have been read.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .model import (
    HARD,
    Clause,
    Const,
    EqLiteral,
    EvidenceSet,
    MlnProgram,
    PredicateDecl,
    PredLiteral,
    Signature,
    Var,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_NON_CLAUSAL = ("<=>", "=>", "->", "^", "&", "|", "∧", "∨", "⇒", "¬")
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<neq>!=)
  | (?P<op><=>|=>|->)
  | (?P<eq>=)
  | (?P<bang>!)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
  | (?P<colon>:)
    """,
    re.VERBOSE,
)
_RESERVED = {"v", "hard", "type", "observable", "hidden"}
_QUANTIFIERS = {"exist", "exists", "EXIST", "EXISTS", "forall", "FORALL"}


def _tokenize_line(text: str, lineno: int) -> list[Token]:
    text = text.split("#", 1)[0]
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos + 1
        if m is None:
            ch = text[pos]
            for op in _NON_CLAUSAL:
                if text.startswith(op, pos):
                    raise ParseError(
                        f"non-clausal construct {op!r}; write clauses as disjunctions joined by 'v'",
                        lineno, col)
            raise ParseError(f"unexpected character {ch!r}", lineno, col)
        kind = m.lastgroup
        if kind == "op":
            raise ParseError(
                f"non-clausal construct {m.group()!r}; write clauses as disjunctions joined by 'v'",
                lineno, col)
        if kind != "ws":
            tokens.append(Token(kind, m.group(), lineno, col))
        pos = m.end()
    return tokens


class _Cursor:
    def __init__(self, tokens: list[Token], lineno: int, line_len: int):
        self.tokens = tokens
        self.i = 0
        self.lineno = lineno
        self.end_col = line_len + 1

    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of line", self.lineno, self.end_col)
        self.i += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            where = (tok.line, tok.col) if tok else (self.lineno, self.end_col)
            found = repr(tok.text) if tok else "end of line"
            raise ParseError(f"expected {what or kind}, found {found}", *where)
        self.i += 1
        return tok

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)

    def expect_end(self):
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col)


def _ident_list(cur: _Cursor, closing: str | None) -> list[Token]:
    items = [cur.expect("ident", "identifier")]
    while cur.peek() is not None and cur.peek().kind == "comma":
        cur.next()
        items.append(cur.expect("ident", "identifier"))
    if closing:
        cur.expect(closing, "')'")
    return items


def _check_name(tok: Token, what: str):
    if tok.text in _RESERVED:
        raise ParseError(f"{tok.text!r} is reserved and cannot name a {what}", tok.line, tok.col)


# --------------------------------------------------------------------------
# program
# --------------------------------------------------------------------------


def parse_program(text: str) -> MlnProgram:
    lines = text.splitlines()
    constants: dict[str, tuple[str, ...]] = {}
    const_type: dict[str, str] = {}
    predicates: dict[str, PredicateDecl] = {}
    pending_preds: list[tuple[Token, list[Token], bool]] = []
    clause_lines: list[tuple[int, _Cursor]] = []

    for lineno, raw in enumerate(lines, start=1):
        tokens = _tokenize_line(raw, lineno)
        if not tokens:
            continue
        cur = _Cursor(tokens, lineno, len(raw))
        head = tokens[0]
        if head.kind == "ident" and head.text == "type":
            cur.next()
            name = cur.expect("ident", "type name")
            _check_name(name, "type")
            if name.text in constants:
                raise ParseError(f"type {name.text!r} declared twice", name.line, name.col)
            cur.expect("colon", "':'")
            consts = _ident_list(cur, None)
            cur.expect_end()
            for c in consts:
                _check_name(c, "constant")
                if c.text in const_type:
                    raise ParseError(f"constant {c.text!r} declared twice", c.line, c.col)
                const_type[c.text] = name.text
            constants[name.text] = tuple(c.text for c in consts)
        elif head.kind == "ident" and head.text in ("observable", "hidden"):
            cur.next()
            name = cur.expect("ident", "predicate name")
            _check_name(name, "predicate")
            cur.expect("lparen", "'('")
            arg_types = _ident_list(cur, "rparen")
            cur.expect_end()
            pending_preds.append((name, arg_types, head.text == "hidden"))
        else:
            clause_lines.append((lineno, cur))

    for name, arg_types, hidden in pending_preds:
        if name.text in predicates:
            raise ParseError(f"predicate {name.text!r} declared twice", name.line, name.col)
        for t in arg_types:
            if t.text not in constants:
                raise ParseError(f"unknown type {t.text!r}", t.line, t.col)
        predicates[name.text] = PredicateDecl(name.text, tuple(t.text for t in arg_types), hidden)

    signature = Signature(constants=constants, predicates=tuple(predicates.values()))
    clauses = tuple(_parse_clause(cur, signature, const_type) for _, cur in clause_lines)
    return MlnProgram(signature=signature, clauses=clauses)


def _parse_weight(cur: _Cursor):
    tok = cur.next()
    if tok.kind == "number":
        try:
            w = float(tok.text)
        except ValueError:  # pragma: no cover - regex admits only floats
            raise ParseError(f"bad weight {tok.text!r}", tok.line, tok.col)
        if w != w or w in (float("inf"), float("-inf")):
            raise ParseError("weight must be finite", tok.line, tok.col)
        return w
    if tok.kind == "ident" and tok.text == "hard":
        return HARD
    raise ParseError(f"expected a weight or 'hard', found {tok.text!r}", tok.line, tok.col)


def _term(tok: Token, const_type: dict[str, str]):
    if tok.kind != "ident":
        raise ParseError(f"expected a term, found {tok.text!r}", tok.line, tok.col)
    if tok.text in _QUANTIFIERS:
        raise ParseError("quantifiers are not supported; variables are implicitly universal",
                         tok.line, tok.col)
    if tok.text in const_type:
        return Const(tok.text)
    if tok.text[0].islower():
        _check_name(tok, "variable")
        return Var(tok.text)
    raise ParseError(f"unknown constant {tok.text!r}", tok.line, tok.col)


def _parse_clause(cur: _Cursor, sig: Signature, const_type: dict[str, str]) -> Clause:
    weight = _parse_weight(cur)
    literals = []
    var_types: dict[str, str] = {}
    equalities: list[tuple[EqLiteral, Token, Token]] = []

    def bind(tok: Token, term, typ: str):
        if isinstance(term, Const):
            if const_type[term.name] != typ:
                raise ParseError(
                    f"constant {term.name!r} has type {const_type[term.name]!r}, expected {typ!r}",
                    tok.line, tok.col)
        else:
            old = var_types.setdefault(term.name, typ)
            if old != typ:
                raise ParseError(
                    f"variable {term.name!r} used with types {old!r} and {typ!r}", tok.line, tok.col)

    while True:
        tok = cur.peek()
        if tok is None:
            raise ParseError("expected a literal", cur.lineno, cur.end_col)
        negated = False
        if tok.kind == "bang":
            cur.next()
            negated = True
            tok = cur.peek()
            if tok is None:
                raise ParseError("expected a predicate after '!'", cur.lineno, cur.end_col)
        if tok.kind == "ident" and tok.text in _QUANTIFIERS:
            raise ParseError("existential and universal quantifiers are not supported",
                             tok.line, tok.col)
        nxt = cur.peek(1)
        if tok.kind == "ident" and nxt is not None and nxt.kind == "lparen":
            cur.next()
            cur.next()
            try:
                decl = sig.predicate(tok.text)
            except KeyError:
                raise ParseError(f"unknown predicate {tok.text!r}", tok.line, tok.col) from None
            arg_toks = _ident_list(cur, "rparen")
            if len(arg_toks) != decl.arity:
                raise ParseError(
                    f"predicate {decl.name!r} takes {decl.arity} arguments, got {len(arg_toks)}",
                    tok.line, tok.col)
            args = tuple(_term(a, const_type) for a in arg_toks)
            for a_tok, a, typ in zip(arg_toks, args, decl.arg_types):
                bind(a_tok, a, typ)
            literals.append(PredLiteral(decl.name, args, negated))
        else:
            if negated:
                raise ParseError("'!' must be followed by a predicate; use '!=' for inequality",
                                 tok.line, tok.col)
            left_tok = cur.next()
            left = _term(left_tok, const_type)
            op = cur.next()
            if op.kind not in ("eq", "neq"):
                raise ParseError(f"expected '=' or '!=', found {op.text!r}", op.line, op.col)
            right_tok = cur.next()
            right = _term(right_tok, const_type)
            lit = EqLiteral(left, right, op.kind == "neq")
            literals.append(lit)
            equalities.append((lit, left_tok, right_tok))
        if cur.at_end():
            break
        sep = cur.next()
        if not (sep.kind == "ident" and sep.text == "v"):
            raise ParseError(f"expected 'v' between literals, found {sep.text!r}", sep.line, sep.col)

    # equality sides share a type; propagate it to variables only used there
    changed = True
    while changed:
        changed = False
        for lit, lt, rt in equalities:
            lty = _term_type(lit.left, var_types, const_type)
            rty = _term_type(lit.right, var_types, const_type)
            if lty and rty and lty != rty:
                raise ParseError(f"equality between types {lty!r} and {rty!r}", lt.line, lt.col)
            if lty and not rty:
                var_types[lit.right.name] = lty
                changed = True
            elif rty and not lty:
                var_types[lit.left.name] = rty
                changed = True
    for lit, lt, rt in equalities:
        for term, tok in ((lit.left, lt), (lit.right, rt)):
            if _term_type(term, var_types, const_type) is None:
                raise ParseError(f"cannot infer the type of variable {term.name!r}", tok.line, tok.col)
    return Clause(tuple(literals), weight)


def _term_type(term, var_types, const_type):
    if isinstance(term, Const):
        return const_type[term.name]
    return var_types.get(term.name)


# --------------------------------------------------------------------------
# evidence
# --------------------------------------------------------------------------


def parse_evidence(text: str, program: MlnProgram) -> EvidenceSet:
    """Read true observable ground atoms; anything not listed is false."""
    sig = program.signature
    const_type = {c: t for t, cs in sig.constants.items() for c in cs}
    atoms = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize_line(raw, lineno)
        if not tokens:
            continue
        cur = _Cursor(tokens, lineno, len(raw))
        if cur.peek().kind == "bang":
            tok = cur.peek()
            raise ParseError("negative evidence is implicit (closed world)", tok.line, tok.col)
        name = cur.expect("ident", "predicate name")
        cur.expect("lparen", "'('")
        args = _ident_list(cur, "rparen")
        cur.expect_end()
        try:
            decl = sig.predicate(name.text)
        except KeyError:
            raise ParseError(f"unknown predicate {name.text!r}", name.line, name.col) from None
        if decl.hidden:
            raise ParseError(f"hidden predicate {decl.name!r} cannot appear in evidence",
                             name.line, name.col)
        if len(args) != decl.arity:
            raise ParseError(f"predicate {decl.name!r} takes {decl.arity} arguments, got {len(args)}",
                             name.line, name.col)
        for a, typ in zip(args, decl.arg_types):
            if a.text not in const_type:
                raise ParseError(f"undeclared constant {a.text!r}", a.line, a.col)
            if const_type[a.text] != typ:
                raise ParseError(f"constant {a.text!r} has type {const_type[a.text]!r}, expected {typ!r}",
                                 a.line, a.col)
        atoms.add((decl.name, tuple(a.text for a in args)))
    return EvidenceSet(frozenset(atoms))


# --------------------------------------------------------------------------
# printing
# --------------------------------------------------------------------------


def format_weight(w) -> str:
    return "hard" if w is HARD else repr(float(w))


def _format_term(t) -> str:
    return t.name


def format_literal(lit) -> str:
    if isinstance(lit, PredLiteral):
        body = f"{lit.predicate}({','.join(_format_term(a) for a in lit.args)})"
        return "!" + body if lit.negated else body
    op = "!=" if lit.negated else "="
    return f"{_format_term(lit.left)} {op} {_format_term(lit.right)}"


def format_clause(clause: Clause) -> str:
    return f"{format_weight(clause.weight)} " + " v ".join(format_literal(l) for l in clause.literals)


def _program_lines(program: MlnProgram) -> Iterator[str]:
    sig = program.signature
    for t, consts in sig.constants.items():
        yield f"type {t}: {', '.join(consts)}"
    for p in sig.predicates:
        kind = "hidden" if p.hidden else "observable"
        yield f"{kind} {p.name}({', '.join(p.arg_types)})"
    if program.clauses:
        yield ""
    for c in program.clauses:
        yield format_clause(c)


def format_program(program: MlnProgram) -> str:
    return "\n".join(_program_lines(program)) + "\n"


def format_evidence(evidence: EvidenceSet) -> str:
    return "".join(f"{p}({','.join(args)})\n" for p, args in sorted(evidence.true_atoms))
