"""Random formula and derivation generators shared by the tests."""
from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from hylo.kernel import Assume, Rule, collect_undischarged, walk
from hylo.syntax import (
    BOT, And, Box, Imp, Nom, Pred, Prop, Sat, Signature, dia, neg, occurs_in,
)

FUZZ_SIG = Signature(props={"p", "q"}, noms={"a", "b"}, mods={"box"})
WIDE_SIG = Signature(props={"p", "q", "r"}, noms={"a", "b", "c"}, mods={"box", "D", "B"},
                     preds={"P": 1, "lt": 2}, times={"t0", "t1"}, rigid={"lt"})


def random_formula(rng: random.Random, sig: Signature, depth: int = 3):
    atoms = [Prop(p) for p in sorted(sig.props)] + [Nom(a) for a in sorted(sig.noms)] + [BOT]
    for sym, arity in sorted(sig.preds.items()):
        atoms.append(Pred(sym, tuple(rng.choice(sorted(sig.times)) for _ in range(arity))))
    if depth <= 0 or rng.random() < 0.25:
        return rng.choice(atoms)
    kinds = ["and", "imp", "neg"] + (["sat"] if sig.noms else []) + (["box", "dia"] if sig.mods else [])
    kind = rng.choice(kinds)
    sub = lambda: random_formula(rng, sig, depth - 1)  # noqa: E731
    if kind == "and":
        return And(sub(), sub())
    if kind == "imp":
        return Imp(sub(), sub())
    if kind == "neg":
        return neg(sub())
    if kind == "sat":
        return Sat(rng.choice(sorted(sig.noms)), sub())
    mod = rng.choice(sorted(sig.mods))
    return Box(mod, sub()) if kind == "box" else dia(mod, sub())


def formulas(sig: Signature = WIDE_SIG, max_leaves: int = 12):
    atoms = [Prop(p) for p in sorted(sig.props)] + [Nom(a) for a in sorted(sig.noms)]
    atoms.append(BOT)
    if sig.preds:
        times = sorted(sig.times)
        atoms += [Pred(s, tuple(ts)) for s, n in sorted(sig.preds.items())
                  for ts in itertools.product(times, repeat=n)]
    mods, noms = sorted(sig.mods), sorted(sig.noms)
    return st.recursive(
        st.sampled_from(atoms),
        lambda inner: st.one_of(
            st.builds(And, inner, inner),
            st.builds(Imp, inner, inner),
            st.builds(Box, st.sampled_from(mods), inner),
            st.builds(Sat, st.sampled_from(noms), inner),
        ),
        max_leaves=max_leaves,
    )


def end_of(d):
    return d.formula if isinstance(d, Assume) else d.conclusion


def depth_of(d) -> int:
    return 1 + max((len(path) for path, _ in walk(d)), default=0)


class DerivationGenerator:
    """Builds random derivations forward; most come out correct, the checker decides."""

    def __init__(self, rng: random.Random, sig: Signature = FUZZ_SIG):
        self.rng = rng
        self.sig = sig
        self.labels = itertools.count(1)
        self.mod = sorted(sig.mods)[0]

    def fresh(self, f):
        return Assume(next(self.labels), f)

    def nominal(self):
        return self.rng.choice(sorted(self.sig.noms))

    def formula(self, depth=1):
        return random_formula(self.rng, self.sig, depth)

    def prove(self, goal, depth):
        """Goal-directed helper so elimination rules get matching premises."""
        if depth > 1 and isinstance(goal, And):
            return Rule("andI", goal, (), (self.prove(goal.left, depth - 1),
                                           self.prove(goal.right, depth - 1)))
        if depth > 1 and isinstance(goal, Imp) and self.rng.random() < 0.5:
            leaf = self.fresh(goal.left)
            body = self.prove(goal.right, depth - 1)
            open_labels = {l for l, f in collect_undischarged(body) if f == goal.left}
            return Rule("impI", goal, open_labels | {leaf.label}, (body,))
        if depth > 1 and isinstance(goal, Sat) and self.rng.random() < 0.5:
            return Rule("satI", goal, (), (self.fresh(Nom(goal.nom)),
                                           self.prove(goal.body, depth - 1)))
        return self.fresh(goal)

    def gen(self, depth: int):
        if depth <= 1 or self.rng.random() < 0.15:
            return self.fresh(self.formula(self.rng.choice([0, 1, 1, 2])))
        rule = self.rng.choice(["andI", "andE", "impI", "impE", "raa", "satI", "satE",
                                "boxI", "boxE", "term", "term", "term", "name"])
        return getattr(self, "_" + rule)(depth)

    def _andI(self, d):
        l, r = self.gen(d - 1), self.gen(d - 1)
        return Rule("andI", And(end_of(l), end_of(r)), (), (l, r))

    def _andE(self, d):
        s = self.gen(d - 1)
        if not isinstance(end_of(s), And):
            s = self.fresh(And(self.formula(), self.formula()))
        e = end_of(s)
        if self.rng.random() < 0.5:
            return Rule("andE1", e.left, (), (s,))
        return Rule("andE2", e.right, (), (s,))

    def _impI(self, d):
        s = self.gen(d - 1)
        opens = sorted(collect_undischarged(s), key=lambda p: p[0])
        if opens and self.rng.random() < 0.7:
            _, f = self.rng.choice(opens)
            labels = {l for l, g in opens if g == f}
        else:
            f, labels = self.formula(), {next(self.labels)}
        return Rule("impI", Imp(f, end_of(s)), labels, (s,))

    def _impE(self, d):
        minor = self.gen(d - 1)
        goal = self.formula()
        major = self.prove(Imp(end_of(minor), goal), d - 1)
        return Rule("impE", goal, (), (major, minor))

    def _raa(self, d):
        p = Prop(self.rng.choice(sorted(self.sig.props)))
        leaf = self.fresh(neg(p))
        bot = Rule("impE", BOT, (), (leaf, self.prove(p, d - 2)))
        return Rule("raa", p, {leaf.label}, (bot,))

    def _satI(self, d):
        s = self.gen(d - 1)
        a = self.nominal()
        return Rule("satI", Sat(a, end_of(s)), (), (self.fresh(Nom(a)), s))

    def _satE(self, d):
        s = self.gen(d - 1)
        if not isinstance(end_of(s), Sat):
            s = self.prove(Sat(self.nominal(), self.formula()), d - 1)
        e = end_of(s)
        return Rule("satE", e.body, (), (self.fresh(Nom(e.nom)), s))

    def _boxE(self, d):
        s = self.gen(d - 1)
        if not (isinstance(end_of(s), Box) and end_of(s).mod == self.mod):
            s = self.fresh(Box(self.mod, self.formula()))
        e = self.nominal()
        return Rule(f"boxE.{self.mod}", Sat(e, end_of(s).body), (),
                    (s, self.fresh(dia(self.mod, Nom(e)))))

    def _boxI(self, d):
        s = self.gen(d - 1)
        if not isinstance(end_of(s), Sat):
            c, body = self.nominal(), self.formula()
            s = Rule(f"boxE.{self.mod}", Sat(c, body), (),
                     (self.fresh(Box(self.mod, body)), self.fresh(dia(self.mod, Nom(c)))))
        c, body = end_of(s).nom, end_of(s).body
        target = dia(self.mod, Nom(c))
        opens = collect_undischarged(s)
        labels = {l for l, f in opens if f == target}
        if occurs_in(c, body) or any(occurs_in(c, f) for l, f in opens if l not in labels):
            return s
        return Rule(f"boxI.{self.mod}", Box(self.mod, body), labels, (s,))

    def local(self, a: str, d: int):
        """Derivation whose open assumptions are only ``a`` and satisfaction statements."""
        choice = self.rng.choice(["leaf", "leaf", "andI", "impE", "satI"]) if d > 2 else "leaf"
        if choice == "andI":
            l, r = self.local(a, d - 1), self.local(a, d - 1)
            return Rule("andI", And(end_of(l), end_of(r)), (), (l, r))
        if choice == "impE":
            minor = self.local(a, d - 1)
            goal = self.formula()
            major = Rule("satE", Imp(end_of(minor), goal), (),
                         (self.fresh(Nom(a)), self.fresh(Sat(a, Imp(end_of(minor), goal)))))
            return Rule("impE", goal, (), (major, minor))
        if choice == "satI":
            s = self.local(a, d - 1)
            return Rule("satI", Sat(a, end_of(s)), (), (self.fresh(Nom(a)), s))
        f = self.formula()
        return Rule("satE", f, (), (self.fresh(Nom(a)), self.fresh(Sat(a, f))))

    def _term(self, d):
        a = self.nominal()
        s = self.gen(d - 1) if self.rng.random() < 0.5 else self.local(a, d - 1)
        if not isinstance(end_of(s), Sat):
            s = Rule("satI", Sat(a, end_of(s)), (), (self.fresh(Nom(a)), s))
        opens = sorted(collect_undischarged(s), key=lambda p: p[0])
        premises, labels = [], set()
        for label, f in opens:
            if f == Nom(a):
                labels.add(label)
            elif isinstance(f, Sat):
                labels.add(label)
                if f not in premises:
                    premises.append(f)
            else:
                return s
        kids = tuple(self.fresh(f) for f in premises) + (s,)
        return Rule("term", end_of(s), labels, kids, a)

    def _name(self, d):
        s = self.gen(d - 1)
        e = end_of(s)
        opens = collect_undischarged(s)
        for a in sorted(self.sig.noms):
            labels = {l for l, f in opens if f == Nom(a)}
            if occurs_in(a, e) or any(occurs_in(a, f) for l, f in opens if l not in labels):
                continue
            return Rule("name", e, labels or {next(self.labels)}, (s,), a)
        return s


def load_corpus(proof: str, theory: str | None = None):
    """``(ProofFile, Theory)`` for a shipped proof, with an optional theory override."""
    from hylo import corpus
    from hylo.proofs import load_proof_file
    from hylo.theory import load_theory_file
    th = load_theory_file(corpus.path(theory)) if theory else None
    return load_proof_file(corpus.path(proof), th)
