"""Theories: ground axioms, axiom schemas and derived rules over pattern variables."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .syntax import (
    And, AppliedVar, Box, Formula, FormulaError, FormulaVar, Imp,
    Pred, Sat, Signature, TermVar, parse_formula, parse_pattern, split_signature,
    parse_signature,
)

__all__ = ["DerivedRule", "Theory", "TheoryError", "match_schema", "substitute",
           "instantiate_rule", "load_theory", "load_theory_file", "BUILTIN_RULES",
           "is_builtin_rule"]

BUILTIN_RULES = frozenset({
    "andI", "andE1", "andE2", "impI", "impE", "raa", "satI", "satE", "term", "name",
})


def is_builtin_rule(name: str) -> bool:
    return name in BUILTIN_RULES or name.startswith(("boxI.", "boxE."))


class TheoryError(ValueError):
    pass


@dataclass(frozen=True)
class DerivedRule:
    name: str
    premises: tuple[Formula, ...]
    conclusion: Formula

    @property
    def arity(self) -> int:
        return len(self.premises)


@dataclass(frozen=True, eq=False)
class Theory:
    signature: Signature
    axioms: Mapping[str, Formula] = field(default_factory=dict)
    schemas: Mapping[str, Formula] = field(default_factory=dict)
    rules: Mapping[str, DerivedRule] = field(default_factory=dict)
    liberalized_term: bool = False

    def __post_init__(self):
        names = [*self.axioms, *self.schemas, *self.rules]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise TheoryError(f"duplicate names: {sorted(dupes)}")
        reserved = [n for n in names if is_builtin_rule(n)]
        if reserved:
            raise TheoryError(f"reserved rule names: {sorted(reserved)}")

    def with_options(self, **changes) -> Theory:
        fields = dict(signature=self.signature, axioms=self.axioms, schemas=self.schemas,
                      rules=self.rules, liberalized_term=self.liberalized_term)
        fields.update(changes)
        return Theory(**fields)


def _bind(sigma: dict, key, value) -> bool:
    prior = sigma.setdefault(key, value)
    return prior == value


def _match_term(pat, term, sigma: dict) -> bool:
    if isinstance(pat, TermVar):
        return isinstance(term, str) and _bind(sigma, pat.name, term)
    return pat == term


def _match(pat: Formula, f: Formula, sigma: dict) -> bool:
    if isinstance(pat, FormulaVar):
        return _bind(sigma, pat.name, f)
    if isinstance(pat, AppliedVar):
        return (isinstance(f, Pred) and len(f.terms) == 1
                and _bind(sigma, pat.name, f.symbol)
                and _match_term(pat.term, f.terms[0], sigma))
    if type(pat) is not type(f):
        return False
    if isinstance(pat, (And, Imp)):
        return _match(pat.left, f.left, sigma) and _match(pat.right, f.right, sigma)
    if isinstance(pat, Box):
        return pat.mod == f.mod and _match(pat.body, f.body, sigma)
    if isinstance(pat, Sat):
        return pat.nom == f.nom and _match(pat.body, f.body, sigma)
    if isinstance(pat, Pred):
        return (pat.symbol == f.symbol and len(pat.terms) == len(f.terms)
                and all(_match_term(p, t, sigma) for p, t in zip(pat.terms, f.terms)))
    return pat == f


def match_schema(pat: Formula, f: Formula, sigma: dict | None = None) -> dict | None:
    """Most general substitution taking ``pat`` to ``f``, or None.

    Formula variables map to formulas, applied variables to predicate symbols and
    term variables to time constants.  A starting ``sigma`` is extended, not mutated.
    """
    out = dict(sigma or {})
    return out if _match(pat, f, out) else None


def _subst_term(t, sigma):
    if isinstance(t, TermVar):
        if t.name not in sigma:
            raise KeyError(t.name)
        return sigma[t.name]
    return t


def substitute(pat: Formula, sigma: Mapping) -> Formula:
    if isinstance(pat, FormulaVar):
        return sigma[pat.name]
    if isinstance(pat, AppliedVar):
        return Pred(sigma[pat.name], (_subst_term(pat.term, sigma),))
    if isinstance(pat, And):
        return And(substitute(pat.left, sigma), substitute(pat.right, sigma))
    if isinstance(pat, Imp):
        return Imp(substitute(pat.left, sigma), substitute(pat.right, sigma))
    if isinstance(pat, Box):
        return Box(pat.mod, substitute(pat.body, sigma))
    if isinstance(pat, Sat):
        return Sat(pat.nom, substitute(pat.body, sigma))
    if isinstance(pat, Pred):
        return Pred(pat.symbol, tuple(_subst_term(t, sigma) for t in pat.terms))
    return pat


def instantiate_rule(rule: DerivedRule, premises) -> Formula | None:
    """Conclusion of ``rule`` for the given premise formulas, or None if they do not fit."""
    premises = list(premises)
    if len(premises) != rule.arity:
        raise TheoryError(f"rule {rule.name} takes {rule.arity} premise(s), got {len(premises)}")
    sigma: dict | None = {}
    for pat, f in zip(rule.premises, premises):
        sigma = match_schema(pat, f, sigma)
        if sigma is None:
            return None
    try:
        return substitute(rule.conclusion, sigma)
    except KeyError:
        # conclusion variable not fixed by any premise
        return None


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts]


_ENTRY = re.compile(r"(axiom|schema|rule|option)\s+([A-Za-z_][A-Za-z0-9_.-]*)\s*:\s*(.*)$")


def load_theory(text: str, base_dir: Path | str | None = None) -> Theory:
    """Read a theory file; the signature is embedded or referenced by ``signature: <file>``."""
    lines = text.splitlines()
    sig = Signature()
    body = []
    for lineno, line in split_signature(lines)[1]:
        key, sep, value = line.partition(":")
        if sep and key.strip() == "signature":
            path = Path(base_dir or ".") / value.strip()
            try:
                sig = sig.merge(parse_signature(path.read_text(encoding="utf-8")))
            except OSError as exc:
                raise TheoryError(f"line {lineno}: cannot read signature {path}: {exc}") from exc
        else:
            body.append((lineno, line))
    sig = sig.merge(split_signature(lines)[0])

    axioms, schemas, rules = {}, {}, {}
    liberalized = False
    seen = set()
    for lineno, line in body:
        m = _ENTRY.match(line)
        if m is None:
            raise TheoryError(f"line {lineno}: cannot read {line!r}")
        kind, name, value = m.groups()
        try:
            if kind == "option":
                if name != "liberalized-term" or value.strip() not in ("on", "off"):
                    raise TheoryError(f"unknown option {name}: {value}")
                liberalized = value.strip() == "on"
                continue
            if name in seen:
                raise TheoryError(f"duplicate name {name!r}")
            if is_builtin_rule(name):
                raise TheoryError(f"{name!r} is a built-in rule name")
            seen.add(name)
            if kind == "axiom":
                axioms[name] = parse_formula(value, sig)
            elif kind == "schema":
                schemas[name] = parse_pattern(value, sig)
            else:
                lhs, arrow, rhs = value.partition("=>")
                if not arrow:
                    raise TheoryError(f"rule {name} needs '=>'")
                sorts: dict[str, str] = {}
                premises = tuple(parse_pattern(p, sig, sorts)
                                 for p in _split_top(lhs, ",") if p)
                bound = set(sorts)
                conclusion = parse_pattern(rhs, sig, sorts)
                if set(sorts) - bound:
                    raise TheoryError(f"rule {name}: conclusion variables "
                                      f"{sorted(set(sorts) - bound)} occur in no premise")
                rules[name] = DerivedRule(name, premises, conclusion)
        except (FormulaError, TheoryError) as exc:
            raise TheoryError(f"line {lineno}: {exc}") from exc
    return Theory(sig, axioms, schemas, rules, liberalized)


def load_theory_file(path: Path | str) -> Theory:
    path = Path(path)
    return load_theory(path.read_text(encoding="utf-8"), path.parent)
