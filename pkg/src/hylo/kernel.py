"""Derivation trees and the checker for hybrid natural deduction with (Term) and (Name).

A derivation is a tree of :class:`Assume`, :class:`AxiomLeaf`, :class:`SchemaLeaf`
and :class:`Rule` nodes.  Discharge is by label: a rule instance closes the
assumption leaves above it (in its scope) whose labels it lists.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from .syntax import (
    Bot, Box, Formula, Imp, Nom, Prop, Sat, And, dia, neg, occurs_in, print_formula,
    is_term_dischargeable,
)
from .theory import Theory, TheoryError, instantiate_rule, match_schema

__all__ = [
    "Assume", "AxiomLeaf", "SchemaLeaf", "Rule", "Node", "Diagnostic", "CheckReport",
    "DischargeError", "collect_undischarged", "check_derivation", "check_rule_instance",
    "walk", "SHAPE", "SIDE", "DISCHARGE", "UNKNOWN_AXIOM", "SCHEMA", "UNKNOWN_RULE",
]

SHAPE = "shape-mismatch"
SIDE = "side-condition-violation"
DISCHARGE = "discharge-error"
UNKNOWN_AXIOM = "unknown-axiom"
SCHEMA = "schema-mismatch"
UNKNOWN_RULE = "unknown-rule"


@dataclass(frozen=True)
class Assume:
    label: int
    formula: Formula


@dataclass(frozen=True)
class AxiomLeaf:
    """A ground axiom of the theory, referred to by name."""
    name: str


@dataclass(frozen=True)
class SchemaLeaf:
    name: str
    formula: Formula


@dataclass(frozen=True)
class Rule:
    rule: str
    conclusion: Formula
    discharge: frozenset[int] = frozenset()
    children: tuple["Node", ...] = ()
    nominal: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "discharge", frozenset(self.discharge))
        object.__setattr__(self, "children", tuple(self.children))


Node = Union[Assume, AxiomLeaf, SchemaLeaf, Rule]
Path = tuple[int, ...]


def format_path(path: Path) -> str:
    return "/" + "/".join(map(str, path))


@dataclass(frozen=True)
class Diagnostic:
    path: Path
    rule: str
    kind: str
    message: str

    def __str__(self):
        return f"{format_path(self.path)} ({self.rule}) {self.kind}: {self.message}"


@dataclass(frozen=True)
class CheckReport:
    verdict: str
    end: Formula | None
    premises: frozenset = frozenset()
    axioms: frozenset = frozenset()
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def accepted(self) -> bool:
        return self.verdict == "accept"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "end": None if self.end is None else print_formula(self.end),
            "premises": sorted(print_formula(f) for f in self.premises),
            "axioms": sorted(print_formula(f) for f in self.axioms),
            "diagnostics": [
                {"path": format_path(d.path), "rule": d.rule, "kind": d.kind,
                 "message": d.message} for d in self.diagnostics
            ],
        }


class DischargeError(ValueError):
    pass


def walk(d: Node, path: Path = ()) -> Iterator[tuple[Path, Node]]:
    """Pre-order traversal yielding ``(path, node)``."""
    yield path, d
    if isinstance(d, Rule):
        for i, child in enumerate(d.children):
            yield from walk(child, path + (i,))


def _in_scope(d: Rule, i: int) -> bool:
    # (Term) discharges only inside its final subderivation
    return d.rule != "term" or i == len(d.children) - 1


def collect_undischarged(d: Node) -> frozenset[tuple[int, Formula]]:
    """Assumption ``(label, formula)`` pairs not closed by any rule instance of ``d``."""
    labels: dict[int, Formula] = {}
    for _, node in walk(d):
        if isinstance(node, Assume):
            prior = labels.setdefault(node.label, node.formula)
            if prior != node.formula:
                raise DischargeError(
                    f"label {node.label} marks both {print_formula(prior)} "
                    f"and {print_formula(node.formula)}")
    return frozenset(_open(d))


def _open(d: Node) -> set:
    if isinstance(d, Assume):
        return {(d.label, d.formula)}
    if not isinstance(d, Rule):
        return set()
    out = set()
    for i, child in enumerate(d.children):
        sub = _open(child)
        if _in_scope(d, i):
            sub = {(l, f) for l, f in sub if l not in d.discharge}
        out |= sub
    return out


class _Reject(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


def _show(f) -> str:
    return print_formula(f)


def _expect(cond: bool, message: str, kind: str = SHAPE):
    if not cond:
        raise _Reject(kind, message)


def _arity(children, n: int, rule: str):
    _expect(len(children) == n, f"{rule} takes {n} premise(s), got {len(children)}")


def _no_discharge(discharge, rule: str):
    _expect(not discharge, f"{rule} does not discharge assumptions", DISCHARGE)


def _split(undischarged, discharge):
    closed = {(l, f) for l, f in undischarged if l in discharge}
    return closed, set(undischarged) - closed


def check_rule_instance(rule: str, conclusion: Formula, children, discharge: Iterable[int],
                        th: Theory, nominal: str | None = None) -> Diagnostic | None:
    """Check one rule instance given each child's end-formula and open assumptions.

    ``children`` is a list of ``(end_formula, undischarged)`` where ``undischarged``
    is a set of ``(label, formula)``.  Returns None if the step is legal.
    """
    try:
        _check_step(rule, conclusion, list(children), frozenset(discharge), th, nominal)
    except _Reject as rej:
        return Diagnostic((), rule, rej.kind, str(rej))
    return None


def _check_step(rule, concl, children, discharge, th: Theory, nominal):
    ends = [c[0] for c in children]
    sig = th.signature

    if rule == "andI":
        _arity(ends, 2, rule)
        _no_discharge(discharge, rule)
        _expect(concl == And(ends[0], ends[1]),
                f"conclusion must be {_show(And(ends[0], ends[1]))}")
    elif rule in ("andE1", "andE2"):
        _arity(ends, 1, rule)
        _no_discharge(discharge, rule)
        _expect(isinstance(ends[0], And), "premise must be a conjunction")
        part = ends[0].left if rule == "andE1" else ends[0].right
        _expect(concl == part, f"conclusion must be {_show(part)}")
    elif rule == "impI":
        _arity(ends, 1, rule)
        _expect(isinstance(concl, Imp) and concl.right == ends[0],
                f"conclusion must be an implication with consequent {_show(ends[0])}")
        closed, _ = _split(children[0][1], discharge)
        for label, f in sorted(closed, key=lambda p: p[0]):
            _expect(f == concl.left,
                    f"label {label} marks {_show(f)}, expected {_show(concl.left)}", DISCHARGE)
    elif rule == "impE":
        _arity(ends, 2, rule)
        _no_discharge(discharge, rule)
        _expect(ends[0] == Imp(ends[1], concl),
                f"first premise must be {_show(Imp(ends[1], concl))}")
    elif rule == "raa":
        _arity(ends, 1, rule)
        _expect(isinstance(ends[0], Bot), "premise must be bot")
        _expect(isinstance(concl, Prop) and concl.name in sig.props,
                f"conclusion {_show(concl)} is not an ordinary propositional symbol", SIDE)
        closed, _ = _split(children[0][1], discharge)
        for label, f in sorted(closed, key=lambda p: p[0]):
            _expect(f == neg(concl),
                    f"label {label} marks {_show(f)}, expected {_show(neg(concl))}", DISCHARGE)
    elif rule == "satI":
        _arity(ends, 2, rule)
        _no_discharge(discharge, rule)
        _expect(isinstance(ends[0], Nom), "first premise must be a nominal")
        _expect(concl == Sat(ends[0].name, ends[1]),
                f"conclusion must be {_show(Sat(ends[0].name, ends[1]))}")
    elif rule == "satE":
        _arity(ends, 2, rule)
        _no_discharge(discharge, rule)
        _expect(isinstance(ends[0], Nom), "first premise must be a nominal")
        _expect(ends[1] == Sat(ends[0].name, concl),
                f"second premise must be {_show(Sat(ends[0].name, concl))}")
    elif rule.startswith("boxI."):
        mod = rule[5:]
        _expect(mod in sig.mods, f"undeclared modality {mod!r}", UNKNOWN_RULE)
        _arity(ends, 1, rule)
        _expect(isinstance(ends[0], Sat), "premise must be a satisfaction statement")
        c, body = ends[0].nom, ends[0].body
        _expect(concl == Box(mod, body), f"conclusion must be {_show(Box(mod, body))}")
        closed, rest = _split(children[0][1], discharge)
        for label, f in sorted(closed, key=lambda p: p[0]):
            _expect(f == dia(mod, Nom(c)),
                    f"label {label} marks {_show(f)}, expected {_show(dia(mod, Nom(c)))}",
                    DISCHARGE)
        _expect(not occurs_in(c, concl), f"{c} occurs in the conclusion", SIDE)
        clash = sorted(_show(f) for _, f in rest if occurs_in(c, f))
        _expect(not clash, f"{c} occurs in undischarged assumption(s) {clash}", SIDE)
    elif rule.startswith("boxE."):
        mod = rule[5:]
        _expect(mod in sig.mods, f"undeclared modality {mod!r}", UNKNOWN_RULE)
        _arity(ends, 2, rule)
        _no_discharge(discharge, rule)
        _expect(isinstance(ends[0], Box) and ends[0].mod == mod,
                f"first premise must be a {mod}-box")
        _expect(isinstance(concl, Sat), "conclusion must be a satisfaction statement")
        _expect(ends[1] == dia(mod, Nom(concl.nom)),
                f"second premise must be {_show(dia(mod, Nom(concl.nom)))}")
        _expect(concl.body == ends[0].body,
                f"conclusion must be {_show(Sat(concl.nom, ends[0].body))}")
    elif rule == "term":
        _expect(nominal is not None, "term needs the discharged nominal")
        _expect(nominal in sig.noms, f"{nominal!r} is not a declared nominal")
        _expect(len(ends) >= 1, "term needs a subderivation")
        *premises, psi = ends
        _expect(concl == psi, f"conclusion must repeat {_show(psi)}")
        allowed = set(premises) | {Nom(nominal)}
        closed, rest = _split(children[-1][1], discharge)
        for label, f in sorted(closed, key=lambda p: p[0]):
            _expect(f in allowed, f"label {label} marks {_show(f)}, which is neither "
                    f"{nominal} nor a premise", DISCHARGE)
        for f in [*premises, psi]:
            _expect(is_term_dischargeable(f, th),
                    f"{_show(f)} is not a satisfaction statement"
                    + (" or rigid atom" if th.liberalized_term else ""), SIDE)
        stray = sorted(_show(f) for _, f in rest)
        _expect(not stray, f"subderivation depends on undischarged {stray}", SIDE)
    elif rule == "name":
        _arity(ends, 1, rule)
        _expect(concl == ends[0], f"conclusion must repeat {_show(ends[0])}")
        closed, rest = _split(children[0][1], discharge)
        noms = {f.name for _, f in closed if isinstance(f, Nom)}
        if nominal is None and len(noms) == 1:
            nominal = noms.pop()
        for label, f in sorted(closed, key=lambda p: p[0]):
            _expect(nominal is not None and f == Nom(nominal),
                    f"label {label} marks {_show(f)}, expected a single nominal", DISCHARGE)
        if nominal is not None:
            _expect(not occurs_in(nominal, concl), f"{nominal} occurs in {_show(concl)}", SIDE)
            clash = sorted(_show(f) for _, f in rest if occurs_in(nominal, f))
            _expect(not clash, f"{nominal} occurs in undischarged assumption(s) {clash}", SIDE)
    elif rule in th.rules:
        derived = th.rules[rule]
        _no_discharge(discharge, rule)
        _arity(ends, derived.arity, rule)
        try:
            result = instantiate_rule(derived, ends)
        except TheoryError as exc:
            raise _Reject(SHAPE, str(exc)) from exc
        _expect(result is not None, f"premises do not fit the patterns of {rule}")
        _expect(result == concl, f"conclusion must be {_show(result)}")
    else:
        raise _Reject(UNKNOWN_RULE, f"no rule named {rule!r}")


def check_derivation(d: Node, th: Theory) -> CheckReport:
    """Check every rule instance and the global labelling discipline of ``d``."""
    diags: list[Diagnostic] = []

    labels: dict[int, Formula] = {}
    claims: dict[int, Path] = {}
    for path, node in walk(d):
        if isinstance(node, Assume):
            prior = labels.setdefault(node.label, node.formula)
            if prior != node.formula:
                diags.append(Diagnostic(path, "assume", DISCHARGE,
                                        f"label {node.label} already marks {_show(prior)}"))
        elif isinstance(node, Rule):
            for label in sorted(node.discharge):
                if label in claims:
                    diags.append(Diagnostic(path, node.rule, DISCHARGE,
                                            f"label {label} already discharged at "
                                            f"{format_path(claims[label])}"))
                else:
                    claims[label] = path

    axioms: set = set()

    def visit(node: Node, path: Path):
        """Return ``(end_formula or None, undischarged set)``."""
        if isinstance(node, Assume):
            return node.formula, {(node.label, node.formula)}
        if isinstance(node, AxiomLeaf):
            if node.name not in th.axioms:
                hint = " (it is a schema)" if node.name in th.schemas else ""
                diags.append(Diagnostic(path, "axiom", UNKNOWN_AXIOM,
                                        f"no axiom named {node.name!r}{hint}"))
                return None, set()
            axioms.add(th.axioms[node.name])
            return th.axioms[node.name], set()
        if isinstance(node, SchemaLeaf):
            if node.name not in th.schemas:
                diags.append(Diagnostic(path, "schema", UNKNOWN_AXIOM,
                                        f"no schema named {node.name!r}"))
                return None, set()
            if match_schema(th.schemas[node.name], node.formula) is None:
                diags.append(Diagnostic(path, "schema", SCHEMA,
                                        f"{_show(node.formula)} is not an instance of "
                                        f"{_show(th.schemas[node.name])}"))
                return None, set()
            axioms.add(node.formula)
            return node.formula, set()

        results = [visit(child, path + (i,)) for i, child in enumerate(node.children)]
        if all(end is not None for end, _ in results):
            diag = check_rule_instance(node.rule, node.conclusion, results, node.discharge,
                                       th, node.nominal)
            if diag is not None:
                diags.append(Diagnostic(path, diag.rule, diag.kind, diag.message))
        out = set()
        for i, (_, sub) in enumerate(results):
            if _in_scope(node, i):
                sub = {(l, f) for l, f in sub if l not in node.discharge}
            out |= sub
        return node.conclusion, out

    end, open_ = visit(d, ())
    for label, f in sorted(open_, key=lambda p: p[0]):
        if label in claims:
            diags.append(Diagnostic(claims[label], "assume", DISCHARGE,
                                    f"assumption {label} ({_show(f)}) lies outside the "
                                    f"scope of the rule that discharges it"))
    diags.sort(key=lambda x: (x.path, x.kind, x.message))
    verdict = "reject" if diags else "accept"
    return CheckReport(verdict, end, frozenset(f for _, f in open_), frozenset(axioms),
                       tuple(diags))
