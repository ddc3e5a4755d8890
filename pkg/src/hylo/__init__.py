"""Proof kernel, checker and finite-model tools for hybrid modal logic."""
from .syntax import (
    BOT, And, AppliedVar, Bot, Box, Formula, FormulaVar, Imp, Nom, Pred, Prop, Sat,
    Signature, TermVar, dia, neg, occurs_in, parse_formula, parse_pattern,
    parse_signature, print_formula, subformulas, is_satisfaction_statement,
    is_term_dischargeable,
)
from .semantics import (
    Model, enumerate_models, eval_formula, find_countermodel, holds_at_all_worlds,
    truth_mask,
)
from .theory import Theory, DerivedRule, instantiate_rule, load_theory, match_schema
from .kernel import (
    Assume, AxiomLeaf, CheckReport, Rule, SchemaLeaf, check_derivation,
    check_rule_instance, collect_undischarged,
)
from .audit import AuditReport, audit_derivation, classify_occurrence

__version__ = "0.1.0"

__all__ = [
    "BOT", "And", "AppliedVar", "Bot", "Box", "Formula", "FormulaVar", "Imp", "Nom", "Pred",
    "Prop", "Sat", "Signature", "TermVar", "dia", "neg", "occurs_in", "parse_formula",
    "parse_pattern", "parse_signature", "print_formula", "subformulas",
    "is_satisfaction_statement", "is_term_dischargeable",
    "Model", "enumerate_models", "eval_formula", "find_countermodel", "holds_at_all_worlds",
    "truth_mask",
    "Theory", "DerivedRule", "instantiate_rule", "load_theory", "match_schema",
    "Assume", "AxiomLeaf", "CheckReport", "Rule", "SchemaLeaf", "check_derivation",
    "check_rule_instance", "collect_undischarged",
    "AuditReport", "audit_derivation", "classify_occurrence",
]
