"""Command-line front end.

Exit status: 0 success/accept, 1 checked and negative, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .audit import AuditError, audit_derivation
from .kernel import check_derivation
from .proofs import ProofFormatError, SexprError, load_proof_file
from .semantics import (
    ModelError, eval_formula, find_countermodel, format_model,
    parse_model,
)
from .syntax import FormulaError, Signature, parse_formula, parse_signature, print_formula
from .theory import TheoryError, load_theory_file

OK, NEGATIVE, BAD_INPUT = 0, 1, 2

_INPUT_ERRORS = (OSError, FormulaError, TheoryError, ProofFormatError, SexprError,
                 ModelError, ValueError)


class _Usage(Exception):
    pass


def _read_sig(path: str | None) -> Signature | None:
    if path is None:
        return None
    return parse_signature(Path(path).read_text(encoding="utf-8"))


def _load(args):
    theory = load_theory_file(args.theory) if args.theory else None
    return load_proof_file(args.proof, theory)


def cmd_parse(args, out) -> int:
    sig = _read_sig(args.sig)
    if sig is None:
        raise _Usage("parse needs --sig")
    out.write(print_formula(parse_formula(args.formula, sig)) + "\n")
    return OK


def cmd_check(args, out) -> int:
    pf, theory = _load(args)
    report = check_derivation(pf.derivation, theory)
    if args.json:
        out.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    else:
        out.write(f"verdict: {report.verdict}\n")
        out.write(f"end-formula: {print_formula(report.end)}\n")
        out.write("premises:\n")
        for f in sorted(map(print_formula, report.premises)):
            out.write(f"  {f}\n")
        if report.axioms:
            out.write("axioms:\n")
            for f in sorted(map(print_formula, report.axioms)):
                out.write(f"  {f}\n")
        for d in report.diagnostics:
            out.write(f"error {d}\n")
    return OK if report.accepted else NEGATIVE


def cmd_eval(args, out) -> int:
    model, g = parse_model(Path(args.model).read_text(encoding="utf-8"), _read_sig(args.sig))
    f = parse_formula(args.formula, model.sig)
    value = eval_formula(model, g, args.world, f)
    out.write(("true" if value else "false") + "\n")
    return OK if value else NEGATIVE


def cmd_countermodel(args, out) -> int:
    if args.max_worlds < 1:
        raise _Usage("--max-worlds must be at least 1")
    sig = _read_sig(args.sig)
    if sig is None:
        raise _Usage("countermodel needs --sig")
    f = parse_formula(args.formula, sig)
    found = find_countermodel(f, sig, args.max_worlds)
    if found is None:
        out.write(f"VALID up to {args.max_worlds}\n")
        return OK
    model, g, w = found
    out.write(f"# false at {w}\n")
    out.write(format_model(model, g))
    return NEGATIVE


def cmd_audit(args, out) -> int:
    pf, theory = _load(args)
    try:
        report = audit_derivation(pf.derivation, theory)
    except AuditError as exc:
        sys.stderr.write(f"hylo: {exc}\n")
        return NEGATIVE
    if not args.machine:
        out.write(report.human())
    out.write(report.machine())
    return NEGATIVE if report.violations else OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hylo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a formula and print its canonical form")
    p.add_argument("--sig", help="signature file")
    p.add_argument("formula")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", help="check a proof file")
    p.add_argument("proof")
    p.add_argument("--theory", help="theory file (default: the one the proof names)")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="evaluate a formula at a world of a model file")
    p.add_argument("--model", required=True)
    p.add_argument("--sig", help="signature file (default: embedded or inferred)")
    p.add_argument("--world", required=True)
    p.add_argument("formula")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("countermodel", help="search small models for a countermodel")
    p.add_argument("--sig")
    p.add_argument("--max-worlds", type=int, default=2)
    p.add_argument("formula")
    p.set_defaults(func=cmd_countermodel)

    p = sub.add_parser("audit", help="classify formula occurrences of a checked proof")
    p.add_argument("proof")
    p.add_argument("--theory")
    p.add_argument("--machine", action="store_true", help="only '<path> <classes> <formula>' lines")
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    try:
        return args.func(args, out)
    except (_Usage, *_INPUT_ERRORS) as exc:
        sys.stderr.write(f"hylo: error: {exc}\n")
        return BAD_INPUT
