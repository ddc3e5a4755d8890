import itertools

import pytest
from hypothesis import given, settings, strategies as st

from hylo.semantics import (
    EnumerationTooLarge, Model, ModelError, count_models, entailment_violations,
    enumerate_models, eval_formula, find_countermodel, format_model, holds_at_all_worlds,
    parse_model, truth_mask,
)
from hylo.syntax import Box, Imp, Nom, Pred, Prop, Sat, Signature, dia

from helpers import formulas

p, q = Prop("p"), Prop("q")
SIG = Signature(props={"p", "q"}, noms={"a", "b"}, mods={"m"})


def one_world(p_true: bool, loop: bool = False):
    sig = Signature(props={"p"}, noms={"a"}, mods={"box"})
    m = Model.build(sig, ["w"], {"box": [("w", "w")] if loop else []},
                    {"p": ["w"] if p_true else []})
    return m, {"a": "w"}


def test_eval_examples():
    m, g = one_world(True)
    assert eval_formula(m, g, "w", p)
    assert eval_formula(m, g, "w", Sat("a", Nom("a")))
    m, g = one_world(False)
    assert eval_formula(m, g, "w", Box("box", p))


def test_eval_errors():
    m, g = one_world(True)
    with pytest.raises(ModelError):
        eval_formula(m, g, "nowhere", p)
    with pytest.raises(ModelError):
        eval_formula(m, g, "w", Prop("zz"))
    with pytest.raises(ModelError):
        eval_formula(m, {}, "w", p)


def test_model_invariants():
    with pytest.raises(ModelError):
        Model.build(SIG, [])
    with pytest.raises(ModelError):
        Model.build(SIG, ["w0"], {"m": [("w0", "w9")]})
    with pytest.raises(ModelError):
        Model.build(SIG, ["w0"], valuation={"zz": ["w0"]})


def test_holds_at_all_worlds():
    sig = Signature(props={"p"}, noms={"a"})
    m = Model.build(sig, ["w0", "w1"], valuation={"p": ["w0"]})
    for g in ({"a": "w0"}, {"a": "w1"}):
        assert holds_at_all_worlds(m, g, Sat("a", Nom("a")))
        assert not holds_at_all_worlds(m, g, p)
        assert holds_at_all_worlds(m, g, Imp(p, p))


def _brute_models(sig, n):
    """Independent enumeration straight from the definition, as comparable tuples."""
    worlds = [f"w{i}" for i in range(n)]
    pairs = [(w, v) for w in worlds for v in worlds]
    powerset = lambda xs: [frozenset(c) for k in range(len(xs) + 1)  # noqa: E731
                           for c in itertools.combinations(xs, k)]
    out = set()
    for rels in itertools.product(powerset(pairs), repeat=len(sig.mods)):
        for vals in itertools.product(powerset(worlds), repeat=len(sig.props)):
            for g in itertools.product(worlds, repeat=len(sig.noms)):
                out.add((n, rels, vals, g))
    return out


def _as_tuple(m, g, sig):
    return (len(m.worlds), tuple(m.relation(x) for x in sorted(sig.mods)),
            tuple(m.true_worlds(x) for x in sorted(sig.props)),
            tuple(g[a] for a in sorted(sig.noms)))


def test_enumeration_count_one_world():
    sig = Signature(props={"p"}, noms={"a"}, mods={"box"})
    models = list(enumerate_models(sig, 1))
    # 2 relations on one world (with or without the loop) x 2 valuations x 1 assignment
    assert len(models) == 4 == len(_brute_models(sig, 1))


@pytest.mark.parametrize("sig", [
    Signature(props={"p"}, noms={"a"}, mods={"box"}),
    Signature(props={"p", "q"}, noms={"a", "b"}, mods={"box"}),
    Signature(props={"p"}, mods={"D", "B"}),
])
def test_enumeration_matches_brute_force(sig):
    got = [_as_tuple(m, g, sig) for m, g in enumerate_models(sig, 2)]
    assert len(got) == len(set(got)) == count_models(sig, 2)
    assert set(got) == _brute_models(sig, 1) | _brute_models(sig, 2)


def test_enumeration_is_deterministic():
    sig = Signature(props={"p"}, noms={"a"}, mods={"box"})
    first = [_as_tuple(m, g, sig) for m, g in enumerate_models(sig, 2)]
    again = [_as_tuple(m, g, sig) for m, g in enumerate_models(sig, 2)]
    assert first == again


def test_enumeration_guards():
    with pytest.raises(ValueError):
        enumerate_models(SIG, 0)
    with pytest.raises(EnumerationTooLarge):
        enumerate_models(SIG, 3, cap=1000)


def test_enumeration_cap_from_environment(monkeypatch):
    monkeypatch.setenv("HYLO_MAX_ENUM", "3")
    with pytest.raises(EnumerationTooLarge):
        enumerate_models(SIG, 1)


def test_empty_nominal_set_gives_one_empty_assignment():
    sig = Signature(props={"p"})
    assignments = [g for _, g in enumerate_models(sig, 1)]
    assert assignments == [{}, {}]


def test_predicate_extensions_enumerated():
    sig = Signature(preds={"P": 1}, times={"t0"})
    models = list(enumerate_models(sig, 1))
    assert len(models) == 2
    assert {eval_formula(m, g, "w0", Pred("P", ("t0",))) for m, g in models} == {True, False}


def test_countermodel_for_atom():
    m, g, w = find_countermodel(p, SIG, 2)
    assert len(m.worlds) == 1
    assert not eval_formula(m, g, w, p)


def test_countermodel_for_sat_to_local():
    f = Imp(Sat("a", p), p)
    sig = Signature(props={"p"}, noms={"a"})
    # brute-force oracle: nothing on one world, something on two
    for n in (1, 2):
        bad = [(m, g, w) for m, g in enumerate_models(sig, n) if len(m.worlds) == n
               for w in m.worlds if not eval_formula(m, g, w, f)]
        assert bool(bad) == (n == 2)
    m, g, w = find_countermodel(f, sig, 2)
    assert len(m.worlds) == 2
    assert w != g["a"]
    assert m.true_worlds("p") == {g["a"]}
    assert not eval_formula(m, g, w, f)


def test_valid_formula_has_no_countermodel():
    assert find_countermodel(Sat("a", Nom("a")), SIG, 3) is None


VALID = [
    Sat("a", Nom("a")),
    Imp(Sat("a", Imp(p, q)), Imp(Sat("a", p), Sat("a", q))),
    Imp(Box("m", Imp(p, q)), Imp(Box("m", p), Box("m", q))),
    Imp(Sat("b", Sat("a", p)), Sat("a", p)),
]
INVALID = [p, Imp(Box("m", p), p), Imp(Sat("a", p), p)]


@pytest.mark.parametrize("f", VALID)
def test_validity_oracle_small(f):
    assert find_countermodel(f, SIG, 2) is None


@pytest.mark.parametrize("f", INVALID)
def test_invalidity_oracle(f):
    m, g, w = find_countermodel(f, SIG, 2)
    assert not eval_formula(m, g, w, f)


def test_no_countermodel_means_true_everywhere():
    f = VALID[2]
    assert find_countermodel(f, SIG, 2) is None
    assert all(holds_at_all_worlds(m, g, f) for m, g in enumerate_models(SIG, 2))


SMALL = Signature(props={"p", "q"}, noms={"a", "b"}, mods={"m"})
MODELS = list(enumerate_models(SMALL, 2))


@settings(max_examples=200)
@given(formulas(SMALL, 8), st.integers(0, len(MODELS) - 1))
def test_mask_agrees_with_pointwise_eval(f, k):
    m, g = MODELS[k]
    mask = truth_mask(m, g, f)
    for i, w in enumerate(m.worlds):
        assert bool(mask >> i & 1) == eval_formula(m, g, w, f)


@settings(max_examples=200)
@given(formulas(SMALL, 6), st.integers(0, len(MODELS) - 1))
def test_diamond_duality(f, k):
    m, g = MODELS[k]
    for w in m.worlds:
        direct = any(eval_formula(m, g, v, f) for (u, v) in m.relation("m") if u == w)
        assert eval_formula(m, g, w, dia("m", f)) == direct


@settings(max_examples=200)
@given(formulas(SMALL, 8), st.integers(0, len(MODELS) - 1))
def test_satisfaction_statements_are_rigid(f, k):
    m, g = MODELS[k]
    values = {eval_formula(m, g, w, Sat("a", f)) for w in m.worlds}
    assert len(values) == 1


def test_entailment_violations_respects_constraints():
    sig = Signature(props={"p", "q"}, noms={"a"})
    goal = Sat("a", q)
    assert next(entailment_violations([Sat("a", p)], goal, sig, 2), None) is not None
    assert next(entailment_violations([Sat("a", p)], goal, sig, 2,
                                      constraints=[Imp(p, q)]), None) is None


MODEL_TEXT = """\
worlds: w0 w1 w2
rel box: w0>w1 w1>w2
val p: w0 w1
assign: a=w0 b=w2
"""


def test_model_file_inferred_signature():
    m, g = parse_model(MODEL_TEXT)
    assert m.worlds == ("w0", "w1", "w2")
    assert m.relation("box") == {("w0", "w1"), ("w1", "w2")}
    assert g == {"a": "w0", "b": "w2"}
    assert eval_formula(m, g, "w0", Box("box", p))
    assert not eval_formula(m, g, "w1", Box("box", p))


def test_model_file_with_extensions():
    text = MODEL_TEXT + "ext lt@w0: (t0,t1)\next lt@w1: (t0,t1) (t1,t0)\n"
    m, g = parse_model(text)
    lt = Pred("lt", ("t1", "t0"))
    assert [eval_formula(m, g, w, lt) for w in m.worlds] == [False, True, False]


def test_model_file_declared_signature_is_strict():
    sig = Signature(props={"q"}, noms={"a", "b"}, mods={"box"})
    with pytest.raises(ModelError):
        parse_model(MODEL_TEXT, sig)


def test_model_file_errors():
    with pytest.raises(ValueError):
        parse_model("worlds: w0\nval p: w9\n")
    with pytest.raises(ValueError):
        parse_model("worlds: w0\nbogus: 1\n")
    with pytest.raises(ValueError):
        parse_model("worlds:\n")


def test_format_model_round_trips():
    for m, g in MODELS[::37]:
        again, g2 = parse_model(format_model(m, g))
        assert again == m and g2 == g
