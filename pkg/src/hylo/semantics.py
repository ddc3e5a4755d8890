"""Finite Kripke models with one accessibility relation per modality.

Worlds are named, but internally a model keeps successor sets and valuations as
bitmasks over world indices so that bounded enumeration stays cheap.
"""
from __future__ import annotations

import itertools
import os
from typing import Iterable, Iterator, Mapping

from .syntax import (
    And, Bot, Box, Formula, Imp, Nom, ParseError, Pred, Prop,
    Sat, Signature, TermVar, format_signature, split_signature,
)

__all__ = [
    "Model", "ModelError", "EnumerationTooLarge", "eval_formula", "truth_mask",
    "holds_at_all_worlds", "enumerate_models", "count_models", "find_countermodel",
    "entailment_violations", "parse_model", "format_model", "max_enum",
]

DEFAULT_MAX_ENUM = 20_000_000


class ModelError(ValueError):
    pass


class EnumerationTooLarge(ModelError):
    pass


def max_enum() -> int:
    """Enumeration cap, overridable through ``HYLO_MAX_ENUM``."""
    raw = os.environ.get("HYLO_MAX_ENUM")
    return int(raw) if raw else DEFAULT_MAX_ENUM


class Model:
    """A finite model ``(W, R_m for each modality, V, predicate extensions)``.

    Build with :meth:`build`; the positional constructor takes the packed form.
    """

    __slots__ = ("sig", "worlds", "index", "succ", "val", "ext")

    def __init__(self, sig: Signature, worlds: tuple[str, ...],
                 succ: Mapping[str, tuple[int, ...]], val: Mapping[str, int],
                 ext: Mapping[str, tuple[frozenset, ...]]):
        if not worlds:
            raise ModelError("a model needs at least one world")
        self.sig = sig
        self.worlds = worlds
        self.index = {w: i for i, w in enumerate(worlds)}
        self.succ = succ
        self.val = val
        self.ext = ext

    @classmethod
    def build(cls, sig: Signature, worlds: Iterable[str],
              relations: Mapping[str, Iterable[tuple[str, str]]] = (),
              valuation: Mapping[str, Iterable[str]] = (),
              extensions: Mapping[tuple[str, str], Iterable[tuple[str, ...]]] = ()) -> Model:
        worlds = tuple(worlds)
        if len(set(worlds)) != len(worlds):
            raise ModelError("duplicate world names")
        index = {w: i for i, w in enumerate(worlds)}

        def idx(w):
            if w not in index:
                raise ModelError(f"unknown world {w!r}")
            return index[w]

        relations, valuation, extensions = dict(relations), dict(valuation), dict(extensions)
        for name, known in (("modality", sig.mods), ("propositional symbol", sig.props)):
            table = relations if name == "modality" else valuation
            for key in table:
                if key not in known:
                    raise ModelError(f"undeclared {name} {key!r}")
        succ = {}
        for m in sorted(sig.mods):
            masks = [0] * len(worlds)
            for w, v in relations.get(m, ()):
                masks[idx(w)] |= 1 << idx(v)
            succ[m] = tuple(masks)
        val = {}
        for p in sorted(sig.props):
            mask = 0
            for w in valuation.get(p, ()):
                mask |= 1 << idx(w)
            val[p] = mask
        per: dict[str, list[set]] = {p: [set() for _ in worlds] for p in sorted(sig.preds)}
        for (p, w), tuples in extensions.items():
            if p not in sig.preds:
                raise ModelError(f"undeclared predicate {p!r}")
            for t in tuples:
                t = tuple(t)
                if len(t) != sig.preds[p] or any(c not in sig.times for c in t):
                    raise ModelError(f"bad tuple {t!r} for {p}/{sig.preds[p]}")
                per[p][idx(w)].add(t)
        ext = {p: tuple(frozenset(s) for s in sets) for p, sets in per.items()}
        return cls(sig, worlds, succ, val, ext)

    @property
    def full(self) -> int:
        return (1 << len(self.worlds)) - 1

    def relation(self, mod: str) -> frozenset[tuple[str, str]]:
        masks = self.succ[mod]
        return frozenset((w, v) for i, w in enumerate(self.worlds)
                         for j, v in enumerate(self.worlds) if masks[i] >> j & 1)

    def true_worlds(self, prop: str) -> frozenset[str]:
        mask = self.val[prop]
        return frozenset(w for i, w in enumerate(self.worlds) if mask >> i & 1)

    def extension_at(self, pred: str, world: str) -> frozenset:
        return self.ext[pred][self.index[world]]

    def _key(self):
        return (self.sig, self.worlds, tuple(sorted(self.succ.items())),
                tuple(sorted(self.val.items())), tuple(sorted(self.ext.items())))

    def __eq__(self, other):
        return isinstance(other, Model) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Model(worlds={self.worlds!r})"


def _check_assignment(m: Model, g: Mapping[str, str]) -> None:
    for a in m.sig.noms:
        if a not in g:
            raise ModelError(f"assignment has no value for nominal {a!r}")
        if g[a] not in m.index:
            raise ModelError(f"nominal {a!r} assigned to unknown world {g[a]!r}")


def eval_formula(m: Model, g: Mapping[str, str], w: str, f: Formula) -> bool:
    """Truth of ``f`` at world ``w`` by the satisfaction clauses, one world at a time."""
    if w not in m.index:
        raise ModelError(f"unknown world {w!r}")
    _check_assignment(m, g)
    return _eval(m, g, w, f)


def _eval(m: Model, g, w: str, f: Formula) -> bool:
    if isinstance(f, Prop):
        if f.name not in m.val:
            raise ModelError(f"undeclared propositional symbol {f.name!r}")
        return bool(m.val[f.name] >> m.index[w] & 1)
    if isinstance(f, Nom):
        if f.name not in g:
            raise ModelError(f"undeclared nominal {f.name!r}")
        return w == g[f.name]
    if isinstance(f, Pred):
        return _pred_holds(m, f, m.index[w])
    if isinstance(f, And):
        return _eval(m, g, w, f.left) and _eval(m, g, w, f.right)
    if isinstance(f, Imp):
        return (not _eval(m, g, w, f.left)) or _eval(m, g, w, f.right)
    if isinstance(f, Bot):
        return False
    if isinstance(f, Box):
        if f.mod not in m.succ:
            raise ModelError(f"undeclared modality {f.mod!r}")
        succ = m.succ[f.mod][m.index[w]]
        return all(_eval(m, g, v, f.body) for j, v in enumerate(m.worlds) if succ >> j & 1)
    if isinstance(f, Sat):
        if f.nom not in g:
            raise ModelError(f"undeclared nominal {f.nom!r}")
        return _eval(m, g, g[f.nom], f.body)
    raise ModelError(f"cannot evaluate pattern {f!r}")


def _pred_holds(m: Model, f: Pred, i: int) -> bool:
    if f.symbol not in m.ext:
        raise ModelError(f"undeclared predicate {f.symbol!r}")
    if any(isinstance(t, TermVar) for t in f.terms):
        raise ModelError(f"cannot evaluate pattern {f!r}")
    return f.terms in m.ext[f.symbol][i]


def truth_mask(m: Model, g: Mapping[str, str], f: Formula) -> int:
    """Bitmask of the worlds where ``f`` holds (bit i is world i)."""
    full = m.full
    if isinstance(f, Prop):
        if f.name not in m.val:
            raise ModelError(f"undeclared propositional symbol {f.name!r}")
        return m.val[f.name]
    if isinstance(f, Nom):
        if f.name not in g:
            raise ModelError(f"undeclared nominal {f.name!r}")
        return 1 << m.index[g[f.name]]
    if isinstance(f, Pred):
        return sum(1 << i for i in range(len(m.worlds)) if _pred_holds(m, f, i))
    if isinstance(f, And):
        return truth_mask(m, g, f.left) & truth_mask(m, g, f.right)
    if isinstance(f, Imp):
        return (full & ~truth_mask(m, g, f.left)) | truth_mask(m, g, f.right)
    if isinstance(f, Bot):
        return 0
    if isinstance(f, Box):
        if f.mod not in m.succ:
            raise ModelError(f"undeclared modality {f.mod!r}")
        body = truth_mask(m, g, f.body)
        out = 0
        for i, s in enumerate(m.succ[f.mod]):
            if s & ~body == 0:
                out |= 1 << i
        return out
    if isinstance(f, Sat):
        if f.nom not in g:
            raise ModelError(f"undeclared nominal {f.nom!r}")
        body = truth_mask(m, g, f.body)
        return full if body >> m.index[g[f.nom]] & 1 else 0
    raise ModelError(f"cannot evaluate pattern {f!r}")


def holds_at_all_worlds(m: Model, g: Mapping[str, str], f: Formula) -> bool:
    _check_assignment(m, g)
    return truth_mask(m, g, f) == m.full


def count_models(sig: Signature, max_worlds: int) -> int:
    """Number of (model, assignment) pairs ``enumerate_models`` would yield."""
    total = 0
    for n in range(1, max_worlds + 1):
        k = 2 ** (n * n * len(sig.mods)) * 2 ** (n * len(sig.props)) * n ** len(sig.noms)
        for arity in sig.preds.values():
            k *= 2 ** (len(sig.times) ** arity * n)
        total += k
    return total


def enumerate_models(sig: Signature, max_worlds: int,
                     cap: int | None = None) -> Iterator[tuple[Model, dict[str, str]]]:
    """Every model with 1..max_worlds worlds named w0, w1, ..., with every assignment.

    No isomorphism reduction; the order is deterministic.
    """
    if max_worlds < 1:
        raise ValueError("max_worlds must be at least 1")
    cap = max_enum() if cap is None else cap
    size = count_models(sig, max_worlds)
    if size > cap:
        raise EnumerationTooLarge(
            f"{size} model/assignment pairs exceed the cap of {cap} (HYLO_MAX_ENUM)")
    return _enumerate(sig, max_worlds)


def _subsets(items: list) -> list[frozenset]:
    return [frozenset(x for k, x in enumerate(items) if bits >> k & 1)
            for bits in range(2 ** len(items))]


def _enumerate(sig: Signature, max_worlds: int):
    mods, props, noms = sorted(sig.mods), sorted(sig.props), sorted(sig.noms)
    preds = sorted(sig.preds)
    times = sorted(sig.times)
    for n in range(1, max_worlds + 1):
        worlds = tuple(f"w{i}" for i in range(n))
        relations = [tuple((r >> (i * n)) & ((1 << n) - 1) for i in range(n))
                     for r in range(2 ** (n * n))]
        ext_choices = []
        for p in preds:
            per_world = _subsets(list(itertools.product(times, repeat=sig.preds[p])))
            ext_choices.append(list(itertools.product(per_world, repeat=n)))
        assignments = [dict(zip(noms, (worlds[i] for i in combo)))
                       for combo in itertools.product(range(n), repeat=len(noms))]
        for rels in itertools.product(relations, repeat=len(mods)):
            succ = dict(zip(mods, rels))
            for vals in itertools.product(range(2 ** n), repeat=len(props)):
                val = dict(zip(props, vals))
                for exts in itertools.product(*ext_choices):
                    model = Model(sig, worlds, succ, val, dict(zip(preds, exts)))
                    for g in assignments:
                        yield model, g


def find_countermodel(f: Formula, sig: Signature, max_worlds: int,
                      cap: int | None = None) -> tuple[Model, dict[str, str], str] | None:
    """First ``(model, assignment, world)`` within the bound where ``f`` is false."""
    for m, g in enumerate_models(sig, max_worlds, cap):
        mask = truth_mask(m, g, f)
        if mask != m.full:
            missing = m.full & ~mask
            w = m.worlds[(missing & -missing).bit_length() - 1]
            return m, g, w
    return None


def entailment_violations(premises: Iterable[Formula], conclusion: Formula, sig: Signature,
                          max_worlds: int, constraints: Iterable[Formula] = (),
                          cap: int | None = None, models=None):
    """Yield ``(model, assignment, world)`` where the premises hold and the conclusion fails.

    Only models in which every constraint holds at all worlds are considered.
    ``models`` may supply a pre-built list of (model, assignment) pairs.
    """
    premises, constraints = list(premises), list(constraints)
    pairs = enumerate_models(sig, max_worlds, cap) if models is None else models
    for m, g in pairs:
        full = m.full
        if any(truth_mask(m, g, c) != full for c in constraints):
            continue
        mask = full
        for p in premises:
            mask &= truth_mask(m, g, p)
            if not mask:
                break
        if mask:
            bad = mask & ~truth_mask(m, g, conclusion)
            if bad:
                yield m, g, m.worlds[(bad & -bad).bit_length() - 1]


# -- model files ---------------------------------------------------------------

def parse_model(text: str, sig: Signature | None = None) -> tuple[Model, dict[str, str]]:
    """Read a model file.  Without any declared signature, symbols are inferred."""
    embedded, lines = split_signature(text.splitlines())
    declared = embedded if sig is None else sig.merge(embedded)
    strict = sig is not None or embedded != Signature()
    worlds: list[str] = []
    relations: dict[str, list] = {}
    valuation: dict[str, list] = {}
    extensions: dict[tuple[str, str], list] = {}
    assignment: dict[str, str] = {}
    for lineno, line in lines:
        head, sep, rest = line.partition(":")
        if not sep:
            raise ParseError(f"line {lineno}: expected 'key: values'")
        words = head.split()
        items = rest.split()
        try:
            if words == ["worlds"]:
                worlds.extend(items)
            elif len(words) == 2 and words[0] == "rel":
                pairs = relations.setdefault(words[1], [])
                for item in items:
                    w, gt, v = item.partition(">")
                    if not gt:
                        raise ParseError(f"bad edge {item!r}")
                    pairs.append((w, v))
            elif len(words) == 2 and words[0] == "val":
                valuation.setdefault(words[1], []).extend(items)
            elif len(words) == 2 and words[0] == "ext":
                pred, at, w = words[1].partition("@")
                if not at:
                    raise ParseError("ext key must be pred@world")
                tuples = []
                for raw in rest.replace(" ", "").replace(")(", ") (").split():
                    if not (raw.startswith("(") and raw.endswith(")")):
                        raise ParseError(f"bad tuple {raw!r}")
                    tuples.append(tuple(raw[1:-1].split(",")))
                extensions.setdefault((pred, w), []).extend(tuples)
            elif words == ["assign"]:
                for item in items:
                    a, eq, w = item.partition("=")
                    if not eq:
                        raise ParseError(f"bad assignment {item!r}")
                    assignment[a] = w
            else:
                raise ParseError(f"unknown key {head!r}")
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    if not strict:
        preds: dict[str, int] = {}
        times = set()
        for (p, _), tuples in extensions.items():
            for t in tuples:
                preds.setdefault(p, len(t))
                times.update(t)
        declared = Signature(frozenset(valuation), frozenset(assignment),
                             frozenset(relations), preds, frozenset(times))
    model = Model.build(declared, worlds, relations, valuation, extensions)
    for a in assignment:
        if a not in declared.noms:
            raise ModelError(f"undeclared nominal {a!r}")
    _check_assignment(model, assignment)
    return model, assignment


def format_model(m: Model, g: Mapping[str, str]) -> str:
    out = [format_signature(m.sig).rstrip("\n"), "worlds: " + " ".join(m.worlds)]
    for mod in sorted(m.sig.mods):
        edges = sorted(m.relation(mod), key=lambda e: (m.index[e[0]], m.index[e[1]]))
        out.append(f"rel {mod}: " + " ".join(f"{w}>{v}" for w, v in edges))
    for p in sorted(m.sig.props):
        out.append(f"val {p}: " + " ".join(w for w in m.worlds if w in m.true_worlds(p)))
    for p in sorted(m.ext):
        for w in m.worlds:
            tuples = sorted(m.extension_at(p, w))
            if tuples:
                out.append(f"ext {p}@{w}: " + " ".join(f"({','.join(t)})" for t in tuples))
    out.append("assign: " + " ".join(f"{a}={g[a]}" for a in sorted(g)))
    return "\n".join(line.rstrip() for line in out) + "\n"
