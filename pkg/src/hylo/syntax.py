"""Formula language: signatures, formula trees, concrete syntax, structural queries.

Formulas are immutable trees built from the constructors below.  Negation and
diamond are not constructors; ``neg`` and ``dia`` build their expansions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

__all__ = [
    "Signature", "Formula", "Prop", "Nom", "Pred", "And", "Imp", "Bot", "Box", "Sat",
    "FormulaVar", "AppliedVar", "TermVar", "BOT", "neg", "dia", "is_neg", "dia_nominal",
    "FormulaError", "ParseError", "UndeclaredError", "SortError", "ArityError",
    "parse_formula", "parse_pattern", "print_formula", "parse_signature",
    "format_signature", "subformulas", "occurs_in", "identifiers",
    "is_satisfaction_statement", "is_term_dischargeable",
]


class FormulaError(ValueError):
    """Base class for everything the formula reader can reject."""


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} at position {pos}"
        super().__init__(message)


class UndeclaredError(FormulaError):
    def __init__(self, ident: str, pos: int | None = None):
        self.ident = ident
        self.pos = pos
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"undeclared identifier {ident!r}{where}")


class SortError(FormulaError):
    pass


class ArityError(FormulaError):
    pass


RESERVED = frozenset({"bot", "dia"})
_SORTS = ("prop", "nom", "mod", "pred", "time")


@dataclass(frozen=True)
class Signature:
    props: frozenset[str] = frozenset()
    noms: frozenset[str] = frozenset()
    mods: frozenset[str] = frozenset()
    preds: Mapping[str, int] = field(default_factory=dict)
    times: frozenset[str] = frozenset()
    rigid: frozenset[str] = frozenset()

    def __post_init__(self):
        for name in ("props", "noms", "mods", "times", "rigid"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        object.__setattr__(self, "preds", dict(self.preds))
        groups = [self.props, self.noms, self.mods, frozenset(self.preds), self.times]
        seen: dict[str, str] = {}
        for sort, names in zip(_SORTS, groups):
            for ident in names:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", ident):
                    raise SortError(f"malformed identifier {ident!r}")
                if ident in RESERVED or (ident == "box" and sort != "mod"):
                    raise SortError(f"{ident!r} is reserved")
                if ident in seen:
                    raise SortError(f"{ident!r} declared both as {seen[ident]} and {sort}")
                seen[ident] = sort
        for name, arity in self.preds.items():
            if arity < 1:
                raise ArityError(f"predicate {name!r} must have positive arity")
        stray = self.rigid - frozenset(self.preds)
        if stray:
            raise SortError(f"rigid symbols must be predicates: {sorted(stray)}")

    def __hash__(self):
        return hash((self.props, self.noms, self.mods,
                     tuple(sorted(self.preds.items())), self.times, self.rigid))

    def sort_of(self, ident: str) -> str | None:
        if ident in self.props:
            return "prop"
        if ident in self.noms:
            return "nom"
        if ident in self.mods:
            return "mod"
        if ident in self.preds:
            return "pred"
        if ident in self.times:
            return "time"
        return None

    def merge(self, other: Signature) -> Signature:
        return Signature(self.props | other.props, self.noms | other.noms,
                         self.mods | other.mods, {**self.preds, **other.preds},
                         self.times | other.times, self.rigid | other.rigid)


# -- formula trees ---------------------------------------------------------

@dataclass(frozen=True)
class Prop:
    name: str


@dataclass(frozen=True)
class Nom:
    name: str


@dataclass(frozen=True)
class TermVar:
    """Pattern variable standing for a time constant."""
    name: str


@dataclass(frozen=True)
class Pred:
    symbol: str
    terms: tuple[Union[str, TermVar], ...]


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Box:
    mod: str
    body: "Formula"


@dataclass(frozen=True)
class Sat:
    nom: str
    body: "Formula"


@dataclass(frozen=True)
class FormulaVar:
    """Pattern variable standing for an arbitrary formula."""
    name: str


@dataclass(frozen=True)
class AppliedVar:
    """Pattern ``?phi(?t)``: a unary predicate atom with both parts variable."""
    name: str
    term: Union[str, TermVar]


Formula = Union[Prop, Nom, Pred, And, Imp, Bot, Box, Sat, FormulaVar, AppliedVar]
BOT = Bot()


def neg(f: Formula) -> Imp:
    return Imp(f, BOT)


def dia(mod: str, f: Formula) -> Imp:
    return neg(Box(mod, neg(f)))


def is_neg(f: Formula) -> bool:
    return isinstance(f, Imp) and isinstance(f.right, Bot)


def dia_nominal(f: Formula) -> tuple[str, str] | None:
    """Return ``(modality, nominal)`` if ``f`` is the expansion of a diamond over a nominal."""
    if is_neg(f) and isinstance(f.left, Box) and is_neg(f.left.body):
        inner = f.left.body.left
        if isinstance(inner, Nom):
            return f.left.mod, inner.name
    return None


# -- lexer / parser ----------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(->)|([()~@&,])|(\?[A-Za-z_][A-Za-z0-9_]*)|([A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", start)
        start = m.start(m.lastindex)
        kind = ("sym", "sym", "var", "ident")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Signature, var_sorts: dict[str, str] | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.end = len(text)
        # None means plain formulas; a dict enables pattern variables
        self.var_sorts = var_sorts

    def peek(self, k: int = 0):
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else ("eof", "", self.end)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind == "eof":
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def starts_formula(self, k: int) -> bool:
        kind, val, _ = self.peek(k)
        return kind in ("ident", "var") or val in ("~", "@", "(")

    def parse(self) -> Formula:
        f = self.implication()
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"unexpected {val!r}", pos)
        return f

    def implication(self) -> Formula:
        left = self.conjunction()
        if self.peek()[1] == "->":
            self.take()
            return Imp(left, self.implication())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek()[1] == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def var_sort(self, name: str, sort: str, pos: int):
        if self.var_sorts is None:
            raise ParseError(f"pattern variable {name!r} outside a pattern", pos)
        prior = self.var_sorts.setdefault(name, sort)
        if prior != sort:
            raise SortError(f"pattern variable {name!r} used as {prior} and as {sort}")

    def modality(self, ident: str, pos: int) -> str:
        if self.sig.sort_of(ident) != "mod":
            if self.sig.sort_of(ident) is None:
                raise UndeclaredError(ident, pos)
            raise SortError(f"{ident!r} at position {pos} is not a modality")
        return ident

    def unary(self) -> Formula:
        kind, val, pos = self.take()
        if val == "~":
            return neg(self.unary())
        if val == "@":
            k2, nom, p2 = self.take()
            if k2 != "ident":
                raise ParseError("expected nominal after '@'", p2)
            sort = self.sig.sort_of(nom)
            if sort is None:
                raise UndeclaredError(nom, p2)
            if sort != "nom":
                raise SortError(f"satisfaction operator needs a nominal, {nom!r} is a {sort}")
            return Sat(nom, self.unary())
        if val == "(":
            f = self.implication()
            self.expect(")")
            return f
        if kind == "var":
            self.var_sort(val, "formula" if self.peek()[1] != "(" else "applied", pos)
            if self.peek()[1] == "(":
                self.take()
                term = self.term()
                self.expect(")")
                return AppliedVar(val, term)
            return FormulaVar(val)
        if kind != "ident":
            raise ParseError(f"unexpected {val or 'end of input'!r}", pos)
        if val == "bot":
            return BOT
        if val in ("box", "dia"):
            k2, m, _ = self.peek()
            keyword = (k2 == "ident" and self.sig.sort_of(m) == "mod" and self.starts_formula(1))
            if val == "dia" or keyword:
                if not keyword:
                    _, m, p2 = self.take()
                    self.modality(m, p2)
                else:
                    self.take()
                body = self.unary()
                return Box(m, body) if val == "box" else dia(m, body)
        sort = self.sig.sort_of(val)
        if sort is None:
            raise UndeclaredError(val, pos)
        if sort == "mod":
            return Box(val, self.unary())
        if sort == "prop":
            return Prop(val)
        if sort == "nom":
            return Nom(val)
        if sort == "time":
            raise SortError(f"time constant {val!r} at position {pos} used as a formula")
        self.expect("(")
        terms = [self.term()]
        while self.peek()[1] == ",":
            self.take()
            terms.append(self.term())
        self.expect(")")
        if len(terms) != self.sig.preds[val]:
            raise ArityError(f"predicate {val!r} takes {self.sig.preds[val]} "
                             f"argument(s), got {len(terms)}")
        return Pred(val, tuple(terms))

    def term(self):
        kind, val, pos = self.take()
        if kind == "var":
            self.var_sort(val, "term", pos)
            return TermVar(val)
        if kind != "ident":
            raise ParseError("expected a time constant", pos)
        sort = self.sig.sort_of(val)
        if sort is None:
            raise UndeclaredError(val, pos)
        if sort != "time":
            raise SortError(f"{val!r} is a {sort}, not a time constant")
        return val


def parse_formula(text: str, sig: Signature) -> Formula:
    """Parse concrete syntax into a formula, desugaring ``~`` and ``dia``."""
    return _Parser(text, sig, None).parse()


def parse_pattern(text: str, sig: Signature, var_sorts: dict[str, str] | None = None) -> Formula:
    """Like ``parse_formula`` but admits ``?phi``, ``?phi(?t)`` and ``?t`` variables.

    ``var_sorts`` is shared across calls to keep variable sorts consistent within a rule.
    """
    return _Parser(text, sig, {} if var_sorts is None else var_sorts).parse()


# -- printer -------------------------------------------------------------------

def _term(t) -> str:
    return t.name if isinstance(t, TermVar) else t


def _binary(f: Formula) -> bool:
    return isinstance(f, And) or (isinstance(f, Imp) and not is_neg(f))


def _operand(f: Formula) -> str:
    if _binary(f) or isinstance(f, (Box, Sat)):
        return f"({print_formula(f)})"
    return print_formula(f)


def _side(f: Formula) -> str:
    return f"({print_formula(f)})" if _binary(f) else print_formula(f)


def print_formula(f: Formula) -> str:
    if isinstance(f, (Prop, Nom, FormulaVar)):
        return f.name
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Pred):
        return f"{f.symbol}({','.join(_term(t) for t in f.terms)})"
    if isinstance(f, AppliedVar):
        return f"{f.name}({_term(f.term)})"
    if isinstance(f, Imp):
        if is_neg(f):
            return "~" + _operand(f.left)
        return f"{_side(f.left)} -> {_side(f.right)}"
    if isinstance(f, And):
        return f"{_side(f.left)} & {_side(f.right)}"
    if isinstance(f, Box):
        return f"{f.mod} {_operand(f.body)}"
    if isinstance(f, Sat):
        return f"@{f.nom} {_operand(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


# -- signature files ---------------------------------------------------------

_SIG_KEYS = {"prop", "nom", "mod", "pred", "time", "rigid"}


def parse_signature(text: str) -> Signature:
    sig, rest = split_signature(text.splitlines())
    for lineno, line in rest:
        raise ParseError(f"line {lineno}: unrecognised signature entry {line!r}")
    return sig


def split_signature(lines) -> tuple[Signature, list[tuple[int, str]]]:
    """Pull signature declarations out of a line list; return the other lines numbered."""
    acc: dict[str, list[str]] = {k: [] for k in _SIG_KEYS}
    rest = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if sep and key.strip() in _SIG_KEYS:
            acc[key.strip()].extend(value.split())
        else:
            rest.append((lineno, line))
    preds = {}
    for item in acc["pred"]:
        name, slash, arity = item.partition("/")
        if not slash or not arity.isdigit():
            raise ParseError(f"predicate declaration {item!r} needs the form name/arity")
        preds[name] = int(arity)
    sig = Signature(frozenset(acc["prop"]), frozenset(acc["nom"]), frozenset(acc["mod"]),
                    preds, frozenset(acc["time"]), frozenset(acc["rigid"]))
    return sig, rest


def format_signature(sig: Signature) -> str:
    lines = [
        "prop: " + " ".join(sorted(sig.props)),
        "nom: " + " ".join(sorted(sig.noms)),
        "mod: " + " ".join(sorted(sig.mods)),
        "pred: " + " ".join(f"{p}/{a}" for p, a in sorted(sig.preds.items())),
        "time: " + " ".join(sorted(sig.times)),
        "rigid: " + " ".join(sorted(sig.rigid)),
    ]
    return "\n".join(line.rstrip() for line in lines) + "\n"


# -- structural queries ------------------------------------------------------

def _children(f: Formula) -> tuple:
    if isinstance(f, (And, Imp)):
        return (f.left, f.right)
    if isinstance(f, Box):
        return (f.body,)
    if isinstance(f, Sat):
        return (Nom(f.nom), f.body)
    return ()


def subformulas(f: Formula) -> frozenset:
    """Reflexive subformula set; ``@a psi`` contributes the nominal ``a`` as well."""
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g not in out:
            out.add(g)
            stack.extend(_children(g))
    return frozenset(out)


def identifiers(f: Formula) -> Iterator[str]:
    """Every identifier token of ``f``, repeats included."""
    if isinstance(f, (Prop, Nom)):
        yield f.name
    elif isinstance(f, Pred):
        yield f.symbol
        yield from (t for t in f.terms if isinstance(t, str))
    elif isinstance(f, AppliedVar):
        if isinstance(f.term, str):
            yield f.term
    elif isinstance(f, (And, Imp)):
        yield from identifiers(f.left)
        yield from identifiers(f.right)
    elif isinstance(f, Box):
        yield f.mod
        yield from identifiers(f.body)
    elif isinstance(f, Sat):
        yield f.nom
        yield from identifiers(f.body)


def occurs_in(x: str, f: Formula) -> bool:
    # no binders in the language, so every occurrence is free
    return any(ident == x for ident in identifiers(f))


def is_satisfaction_statement(f: Formula) -> bool:
    return isinstance(f, Sat)


def is_term_dischargeable(f: Formula, th) -> bool:
    """Whether ``f`` may be carried across a (Term) perspective shift under theory ``th``."""
    if isinstance(f, Sat):
        return True
    return (isinstance(f, Pred) and th.liberalized_term
            and f.symbol in th.signature.rigid)
