"""Command-line entry point: ``kbmap solve|ground|oracle-check|gen|bench``.

Wall-clock times printed by ``solve`` and ``bench`` are machine-dependent;
the master and subproblem dimensions are not.
"""

from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
import time
from pathlib import Path

from .colgen import APRIORI, PRICING, ColGenConfig, solve_k_bounded, solve_naive
from .encoder import encode_subproblem
from .grounder import DEFAULT_HARD_WEIGHT, dimension_summary, ground
from .model import EPS, GroundNetwork
from .oracle import MAX_CANDIDATES, brute_force_k_map, brute_force_subproblem
from .parser import ParseError, parse_evidence, parse_program
from .pbsolver import BACKENDS, solve
from .synth import GenSpec, generate_matching

_LEVEL = {
    "type": "object",
    "required": ["n", "score", "state", "master", "subproblems"],
    "properties": {
        "n": {"type": "integer", "minimum": 0},
        "score": {"type": "number"},
        "state": {"type": "array", "items": {"type": "string"}},
        "master": {"$ref": "#/$defs/dims"},
        "subproblems": {
            "type": "object",
            "required": ["count", "cols", "rows"],
            "properties": {k: {"type": "integer", "minimum": 0}
                           for k in ("count", "screened", "cols", "rows")},
        },
    },
}

# JSON written by ``solve --json``
TRACE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["levels", "result"],
    "$defs": {
        "dims": {
            "type": "object",
            "required": ["cols", "rows"],
            "properties": {"cols": {"type": "integer", "minimum": 0},
                           "rows": {"type": "integer", "minimum": 0}},
        },
    },
    "properties": {
        "method": {"enum": ["colgen", "naive"]},
        "levels": {"type": "array", "items": _LEVEL},
        "pricing": {"type": "array", "items": {"type": "string"}},
        "iterations": {"type": "array", "items": {"type": "object"}},
        "result": {
            "type": "object",
            "required": ["state", "score"],
            "properties": {"state": {"type": "array", "items": {"type": "string"}},
                           "score": {"type": "number"}},
        },
        "naive": {
            "type": "object",
            "required": ["cols", "rows"],
            "properties": {"cols": {"type": "integer"}, "rows": {"type": "integer"},
                           "score": {"type": "number"}, "seconds": {"type": "number"}},
        },
    },
}

# JSON written by ``ground --json``
GROUND_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["atoms", "clauses", "summary"],
    "properties": {
        "atoms": {"type": "array", "items": {"type": "string"}},
        "clauses": {"type": "array", "items": {
            "type": "object",
            "required": ["pos", "neg", "weight"],
            "properties": {"pos": {"type": "array", "items": {"type": "string"}},
                           "neg": {"type": "array", "items": {"type": "string"}},
                           "weight": {"type": "number"}},
        }},
        "summary": {
            "type": "object",
            "required": ["atoms", "clauses", "unit_clauses", "non_unit_clauses"],
            "properties": {k: {"type": "integer", "minimum": 0}
                           for k in ("atoms", "clauses", "unit_clauses", "non_unit_clauses")},
        },
    },
}


class CliError(Exception):
    """Reported on stderr with exit status 2."""


def _load(args) -> GroundNetwork:
    try:
        program_text = Path(args.program).read_text()
        evidence_text = Path(args.evidence).read_text()
    except OSError as exc:
        raise CliError(f"cannot read input: {exc}") from exc
    try:
        program = parse_program(program_text)
    except ParseError as exc:
        raise CliError(f"{args.program}: {exc}") from exc
    try:
        evidence = parse_evidence(evidence_text, program)
    except ParseError as exc:
        raise CliError(f"{args.evidence}: {exc}") from exc
    return ground(program, evidence, hard_weight=args.hard_weight)


def _write_json(path: str, data: dict):
    text = json.dumps(data, indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _report_stream(args):
    # keep stdout clean when the JSON goes there
    return sys.stderr if getattr(args, "json", None) == "-" else sys.stdout


def _fmt_state(names) -> str:
    return "{" + ", ".join(names) + "}"


def cmd_solve(args) -> int:
    out = _report_stream(args)
    network = _load(args)
    config = ColGenConfig(k=args.k, m=args.m, pricing=args.pricing,
                          hard_weight=args.hard_weight, backend=args.backend)
    result = solve_k_bounded(network, config)
    trace = result.to_trace(network)
    if args.naive:
        naive = solve_naive(network, args.k, backend=args.backend)
        cols, rows = naive.final_master_dims
        trace["naive"] = {"cols": cols, "rows": rows, "score": naive.score,
                          "seconds": naive.seconds}

    for level in trace["levels"]:
        sub = level["subproblems"]
        print(f"n={level['n']:<3} score={level['score']:.6f} "
              f"master={level['master']['cols']}x{level['master']['rows']} "
              f"subproblems={sub['count']} (screened {sub['screened']}) "
              f"state={_fmt_state(level['state'])}", file=out)
    print(f"pricing order: {', '.join(trace['pricing'])}", file=out)
    print(f"result: score={result.score:.6f} state={_fmt_state(trace['result']['state'])}", file=out)
    if args.naive:
        nv = trace["naive"]
        print(f"naive master: {nv['cols']}x{nv['rows']} score={nv['score']:.6f}", file=out)
    if args.json:
        _write_json(args.json, trace)
    return 0


def cmd_ground(args) -> int:
    out = _report_stream(args)
    network = _load(args)
    summary = dimension_summary(network)
    print(" ".join(f"{k}={v}" for k, v in summary.items()), file=out)
    if args.json:
        name = network.atom_name
        _write_json(args.json, {
            "atoms": [name(h) for h in network.atom_ids],
            "clauses": [{"pos": [name(h) for h in sorted(c.pos)],
                         "neg": [name(h) for h in sorted(c.neg)],
                         "weight": c.weight} for c in network.clauses],
            "summary": summary,
        })
    return 0


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=EPS)


def cmd_oracle_check(args) -> int:
    network = _load(args)
    atoms = list(network.atom_ids)
    if len(atoms) > MAX_CANDIDATES:
        raise CliError(f"{len(atoms)} hidden atoms; the oracle enumerates at most {MAX_CANDIDATES}")
    _, expected = brute_force_k_map(network, atoms, args.k)
    mismatches = 0

    def report(label, got, want):
        nonlocal mismatches
        ok = _close(got, want)
        mismatches += not ok
        print(f"{'ok  ' if ok else 'FAIL'} {label}: engine={got!r} oracle={want!r}")

    for pricing in PRICING:
        res = solve_k_bounded(network, ColGenConfig(k=args.k, m=args.m, pricing=pricing))
        report(f"colgen k={args.k} m={args.m} pricing={pricing}", res.score, expected)
    report(f"naive k={args.k}", solve_naive(network, args.k).score, expected)
    everything = frozenset(atoms)
    for h in atoms:
        for n in range(args.k):
            got = solve(encode_subproblem(network, everything, h, n).model).value
            want = brute_force_subproblem(network, everything, h, n)
            report(f"subproblem {network.atom_name(h)} k={n}", got, want)
    print("agreement" if not mismatches else f"{mismatches} mismatch(es)")
    return 1 if mismatches else 0


def _read_spec(path: str) -> GenSpec:
    try:
        return GenSpec.from_json(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read spec: {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise CliError(f"{path}: {exc}") from exc


def cmd_gen(args) -> int:
    program, evidence = generate_matching(_read_spec(args.spec))
    Path(args.out_program).write_text(program)
    Path(args.out_evidence).write_text(evidence)
    return 0


def cmd_bench(args) -> int:
    out = _report_stream(args)
    spec = _read_spec(args.spec)
    program_text, evidence_text = generate_matching(spec)
    program = parse_program(program_text)
    network = ground(program, parse_evidence(evidence_text, program), hard_weight=spec.hard_weight)
    rows = []
    for k in args.k:
        runs = {"colgen": [], "naive": []}
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            cg = solve_k_bounded(network, ColGenConfig(k=k, m=args.m, backend=args.backend))
            runs["colgen"].append((cg, time.perf_counter() - t0))
            t0 = time.perf_counter()
            nv = solve_naive(network, k, backend=args.backend)
            runs["naive"].append((nv, time.perf_counter() - t0))
        for method, results in runs.items():
            res = results[0][0]
            cols, rows_ = res.final_master_dims
            rows.append({"k": k, "method": method, "cols": cols, "rows": rows_,
                         "seconds": statistics.median(t for _, t in results),
                         "score": res.score})

    print(f"{'k':>3} {'method':<7} {'cols':>7} {'rows':>7} {'seconds':>9} score", file=out)
    for r in rows:
        print(f"{r['k']:>3} {r['method']:<7} {r['cols']:>7} {r['rows']:>7} "
              f"{r['seconds']:>9.3f} {r['score']:.6f}", file=out)
    print("(times are wall-clock medians and depend on the machine)", file=out)
    if args.json:
        _write_json(args.json, {"spec": json.loads(spec.to_json()), "rows": rows})
    return 0


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kbmap", description="k-bounded MAP inference by column generation")
    sub = parser.add_subparsers(dest="command", required=True)

    def inputs(p):
        p.add_argument("--program", required=True, help="program file")
        p.add_argument("--evidence", required=True, help="evidence file")
        p.add_argument("--hard-weight", type=float, default=DEFAULT_HARD_WEIGHT,
                       help="weight given to hard clauses (default %(default)s)")

    p = sub.add_parser("solve", help="compute a k-bounded MAP state")
    inputs(p)
    p.add_argument("-k", type=_nonneg, required=True, help="maximum number of true hidden atoms")
    p.add_argument("-m", type=_positive, default=1, help="atoms priced per round (default 1)")
    p.add_argument("--pricing", choices=PRICING, default=APRIORI)
    p.add_argument("--naive", action="store_true", help="also solve the full master and report its size")
    p.add_argument("--backend", choices=BACKENDS, default="auto", help="0-1 solver (default auto)")
    p.add_argument("--json", metavar="OUT", help="write the trace as JSON ('-' for stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("ground", help="ground a program and print its dimensions")
    inputs(p)
    p.add_argument("--json", metavar="OUT", help="write atoms, clauses and summary as JSON")
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("oracle-check", help="compare the engine with brute-force enumeration")
    inputs(p)
    p.add_argument("-k", type=_nonneg, required=True)
    p.add_argument("-m", type=_positive, default=1)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("gen", help="write a synthetic matching instance")
    p.add_argument("--spec", required=True, help="GenSpec JSON file")
    p.add_argument("--out-program", required=True)
    p.add_argument("--out-evidence", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="naive master vs column generation")
    p.add_argument("--spec", required=True, help="GenSpec JSON file")
    p.add_argument("-k", type=_nonneg, nargs="+", required=True, help="one or more bounds")
    p.add_argument("-m", type=_positive, default=1)
    p.add_argument("--repeat", type=_positive, default=1)
    p.add_argument("--backend", choices=BACKENDS, default="auto")
    p.add_argument("--json", metavar="OUT")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"kbmap: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # infeasible master or invalid configuration
        print(f"kbmap: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
