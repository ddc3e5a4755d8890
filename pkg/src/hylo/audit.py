"""Analyticity audit: which subformula-property classes each formula occurrence meets.

The five classes, for an occurrence theta against end-formula phi and premises Gamma:

1. ``@a psi`` with psi a subformula of phi or Gamma, or a nominal, or a diamond of one
2. theta itself is such a subformula, nominal, or diamond-of-nominal
3. theta is a nominal
4. ``@a ~p`` or ``~p`` with p an ordinary propositional symbol among those subformulas
5. ``@a bot`` or ``bot``
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .kernel import (
    Assume, AxiomLeaf, Node, Rule, SchemaLeaf, check_derivation, format_path, walk,
)
from .syntax import Bot, Formula, Nom, Prop, Sat, dia_nominal, is_neg, print_formula, subformulas
from .theory import Theory, is_builtin_rule

__all__ = ["AuditError", "Occurrence", "AuditReport", "classify_occurrence",
           "audit_derivation", "reference_set"]


class AuditError(ValueError):
    pass


def reference_set(phi: Formula, gamma: Iterable[Formula]) -> frozenset:
    out = set(subformulas(phi))
    for g in gamma:
        out |= subformulas(g)
    return frozenset(out)


def _simple(psi: Formula, ref: frozenset) -> bool:
    return psi in ref or isinstance(psi, Nom) or dia_nominal(psi) is not None


def classify_occurrence(theta: Formula, phi: Formula, gamma: Iterable[Formula],
                        ref: frozenset | None = None) -> frozenset[int]:
    if ref is None:
        ref = reference_set(phi, gamma)
    classes = set()
    if isinstance(theta, Sat) and _simple(theta.body, ref):
        classes.add(1)
    if _simple(theta, ref):
        classes.add(2)
    if isinstance(theta, Nom):
        classes.add(3)
    core = theta.body if isinstance(theta, Sat) else theta
    if is_neg(core) and isinstance(core.left, Prop) and core.left in ref:
        classes.add(4)
    if isinstance(core, Bot):
        classes.add(5)
    return frozenset(classes)


@dataclass(frozen=True)
class Occurrence:
    path: tuple[int, ...]
    formula: Formula
    classes: frozenset[int]

    @property
    def violation(self) -> bool:
        return not self.classes

    def line(self) -> str:
        cls = "{" + ",".join(map(str, sorted(self.classes))) + "}"
        return f"{format_path(self.path)} {cls} {print_formula(self.formula)}"


@dataclass(frozen=True)
class AuditReport:
    end: Formula
    gamma: frozenset
    occurrences: tuple[Occurrence, ...]

    @property
    def violations(self) -> tuple[Occurrence, ...]:
        return tuple(o for o in self.occurrences if o.violation)

    def machine(self) -> str:
        return "".join(o.line() + "\n" for o in self.occurrences)

    def human(self) -> str:
        lines = [f"end-formula: {print_formula(self.end)}",
                 "reference premises: " + ", ".join(sorted(print_formula(g) for g in self.gamma)),
                 f"occurrences: {len(self.occurrences)}",
                 f"violations: {len(self.violations)}"]
        lines += [f"  outside every class: {o.line()}" for o in self.violations]
        return "\n".join(lines) + "\n"


def _formula_at(node: Node, th: Theory) -> Formula:
    if isinstance(node, Assume):
        return node.formula
    if isinstance(node, AxiomLeaf):
        return th.axioms[node.name]
    if isinstance(node, SchemaLeaf):
        return node.formula
    return node.conclusion


def audit_derivation(d: Node, th: Theory) -> AuditReport:
    """Classify every formula occurrence of an accepted derivation.

    Gamma is the undischarged premises plus axiom and schema-instance leaves; the
    conclusions of theory-derived rules are added to it as well.
    """
    report = check_derivation(d, th)
    if not report.accepted:
        raise AuditError("derivation does not check; audit needs an accepted derivation")
    gamma = set(report.premises) | set(report.axioms)
    for _, node in walk(d):
        if isinstance(node, Rule) and not is_builtin_rule(node.rule):
            gamma.add(node.conclusion)
    ref = reference_set(report.end, gamma)
    occs = []
    for path, node in walk(d):
        f = _formula_at(node, th)
        occs.append(Occurrence(path, f, classify_occurrence(f, report.end, gamma, ref)))
    return AuditReport(report.end, frozenset(gamma), tuple(occs))
