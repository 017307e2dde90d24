import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kbmap.model import HARD, EqLiteral, PredLiteral, Var
from kbmap.parser import (
    ParseError,
    format_evidence,
    format_program,
    parse_evidence,
    parse_program,
)

HEADER = """\
type C1: a1, b1, c1
type C2: a2, b2
observable sub1(C1, C1)
observable dis1(C1, C1)
observable sub2(C2, C2)
hidden map(C1, C2)
"""


def test_fixture_signature(fixture_program):
    sig = fixture_program.signature
    assert {p.name for p in sig.observable_predicates} == {"sub1", "sub2", "dis1", "dis2"}
    assert [p.name for p in sig.hidden_predicates] == ["map"]
    assert sorted(c for cs in sig.constants.values() for c in cs) == ["a1", "a2", "b1", "b2", "c1"]
    units = [c for c in fixture_program.clauses if len(c.literals) == 1]
    schemas = [c for c in fixture_program.clauses if len(c.literals) > 1]
    assert len(units) == 6
    assert len(schemas) == 3
    assert all(c.weight is HARD for c in schemas)


def test_fixture_evidence(fixture_evidence):
    assert fixture_evidence.true_atoms == frozenset({
        ("sub1", ("c1", "a1")), ("dis1", ("a1", "b1")), ("dis1", ("b1", "a1")),
        ("dis1", ("b1", "c1")), ("dis1", ("c1", "b1")), ("sub2", ("b2", "a2")),
    })


def test_clause_structure():
    prog = parse_program(HEADER + "hard !map(x,y) v !map(x,z) v y = z\n")
    (clause,) = prog.clauses
    assert clause.literals[0] == PredLiteral("map", (Var("x"), Var("y")), True)
    assert clause.literals[2] == EqLiteral(Var("y"), Var("z"), False)
    assert clause.variables() == ["x", "y", "z"]


def test_round_trip(fixture_program):
    text = format_program(fixture_program)
    again = parse_program(text)
    assert again == fixture_program
    assert format_program(again) == text


def test_evidence_duplicates_collapse(fixture_program):
    ev = parse_evidence("sub1(c1,a1)\nsub1(c1,a1)\n\n# note\nsub1(c1,a1)\n", fixture_program)
    assert len(ev) == 1


def test_evidence_round_trip(fixture_program, fixture_evidence):
    text = format_evidence(fixture_evidence)
    assert parse_evidence(text, fixture_program) == fixture_evidence


@pytest.mark.parametrize("body, line, col, fragment", [
    ("0.5 map(x,y) => map(y,x)", 7, 14, "non-clausal"),
    ("0.5 map(x,y) ^ map(x,y)", 7, 14, "non-clausal"),
    ("0.5 EXIST y map(x,y)", 7, 5, "quantifier"),
    ("0.5 foo(x)", 7, 5, "unknown predicate"),
    ("0.5 map(x)", 7, 5, "takes 2 arguments"),
    ("0.5 map(a2,b2)", 7, 9, "has type"),
    ("abc map(x,y)", 7, 1, "expected a weight"),
    ("0.5 map(x,y) map(x,y)", 7, 14, "expected 'v'"),
    ("0.5 !x = y", 7, 6, "'!' must be followed"),
    ("0.5 sub1(x,x') v sub2(y,y') v x = y", 7, 31, "equality between types"),
])
def test_program_errors(body, line, col, fragment):
    with pytest.raises(ParseError) as err:
        parse_program(HEADER + body + "\n")
    assert fragment in err.value.message
    assert (err.value.line, err.value.col) == (line, col)


@pytest.mark.parametrize("text, fragment", [
    ("type T: a\ntype T: b\n", "declared twice"),
    ("type T: a, a\n", "declared twice"),
    ("observable p(U)\n", "unknown type"),
    ("type v: a\n", "reserved"),
    ("type T: a\nhidden p(T)\nhidden p(T)\n", "declared twice"),
])
def test_declaration_errors(text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_program(text)


@pytest.mark.parametrize("text, fragment", [
    ("!sub1(c1,a1)", "closed world"),
    ("map(a1,a2)", "hidden predicate"),
    ("sub1(c1,d1)", "undeclared constant"),
    ("sub1(c1,a2)", "has type"),
    ("sub1(c1)", "takes 2 arguments"),
    ("nope(c1)", "unknown predicate"),
])
def test_evidence_errors(fixture_program, text, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_evidence(text + "\n", fixture_program)


def test_declarations_after_clauses():
    text = "0.5 p(x)\ntype T: a, b\nhidden p(T)\n"
    prog = parse_program(text)
    assert len(prog.clauses) == 1


def test_variable_type_through_equality():
    prog = parse_program("type T: a\nhidden p(T)\n1.0 !p(x) v x = y\n")
    assert len(prog.clauses[0].literals) == 2


weights = st.one_of(st.just(HARD), st.floats(-5, 5, allow_nan=False).map(lambda w: round(w, 3)))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(weights, st.lists(st.tuples(st.booleans(), st.sampled_from(
    ["map(x,y)", "map(a1,y)", "sub1(x,z)", "sub2(y,w)", "dis1(z,x)"])), min_size=1, max_size=4)),
    min_size=1, max_size=6))
def test_round_trip_random(clauses):
    lines = []
    for w, lits in clauses:
        ws = "hard" if w is HARD else repr(w)
        lines.append(ws + " " + " v ".join(("!" if neg else "") + a for neg, a in lits))
    prog = parse_program(HEADER + "observable dis2(C2, C2)\n" + "\n".join(lines) + "\n")
    assert parse_program(format_program(prog)) == prog
