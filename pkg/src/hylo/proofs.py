"""Reading and writing proof files (one s-expression per file)."""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .kernel import Assume, AxiomLeaf, Node, Rule, SchemaLeaf
from .syntax import FormulaError, Signature, parse_formula, print_formula
from .theory import Theory, load_theory_file

__all__ = ["SexprError", "ProofFormatError", "Symbol", "read_sexpr", "ProofFile",
           "read_proof", "write_proof", "load_proof_file"]


class SexprError(ValueError):
    pass


class ProofFormatError(ValueError):
    pass


class Symbol(str):
    """Bare atom, as opposed to a quoted string."""

    def __repr__(self):
        return f"Symbol({str(self)!r})"


_ATOM = re.compile(r'\s*(?:(;[^\n]*)|(\()|(\))|"((?:[^"\\]|\\.)*)"|([^\s()";]+))')


def read_sexpr(text: str):
    """Parse exactly one s-expression.  Lists become Python lists."""
    stack: list[list] = [[]]
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _ATOM.match(text, pos)
        if m is None:
            raise SexprError(f"unreadable input at offset {pos}")
        pos = m.end()
        comment, opening, closing, string, atom = m.groups()
        if comment is not None:
            continue
        if opening:
            stack.append([])
        elif closing:
            if len(stack) == 1:
                raise SexprError(f"unbalanced ')' at offset {m.start(3)}")
            done = stack.pop()
            stack[-1].append(done)
        elif string is not None:
            stack[-1].append(re.sub(r"\\(.)", r"\1", string))
        elif atom is not None:
            stack[-1].append(int(atom) if re.fullmatch(r"-?\d+", atom) else Symbol(atom))
    if len(stack) != 1:
        raise SexprError("unclosed '('")
    if len(stack[0]) != 1:
        raise SexprError(f"expected one top-level form, found {len(stack[0])}")
    return stack[0][0]


@dataclass(frozen=True)
class ProofFile:
    derivation: Node
    theory_ref: str | None = None


def _is_form(x, head: str) -> bool:
    return isinstance(x, list) and x and isinstance(x[0], Symbol) and x[0] == head


def _formula(x, sig: Signature):
    if not isinstance(x, str) or isinstance(x, Symbol):
        raise ProofFormatError(f"expected a quoted formula, got {x!r}")
    try:
        return parse_formula(x, sig)
    except FormulaError as exc:
        raise ProofFormatError(f"in formula {x!r}: {exc}") from exc


def _label(x) -> int:
    if not isinstance(x, int) or x < 1:
        raise ProofFormatError(f"labels are positive integers, got {x!r}")
    return x


def _node(x, sig: Signature) -> Node:
    if _is_form(x, "assume"):
        if len(x) != 3:
            raise ProofFormatError("(assume <label> \"<formula>\")")
        return Assume(_label(x[1]), _formula(x[2], sig))
    if _is_form(x, "axiom"):
        if len(x) != 2 or isinstance(x[1], (Symbol, int)):
            raise ProofFormatError('(axiom "<name>")')
        return AxiomLeaf(x[1])
    if _is_form(x, "schema"):
        if len(x) != 3 or isinstance(x[1], (Symbol, int)):
            raise ProofFormatError('(schema "<name>" "<instance>")')
        return SchemaLeaf(x[1], _formula(x[2], sig))
    if _is_form(x, "rule"):
        if len(x) < 4 or not isinstance(x[1], Symbol) or not _is_form(x[3], "discharge"):
            raise ProofFormatError('(rule <id> "<conclusion>" (discharge ...) node*)')
        rest = x[4:]
        nominal = None
        if rest and _is_form(rest[0], "nominal"):
            if len(rest[0]) != 2 or not isinstance(rest[0][1], Symbol):
                raise ProofFormatError("(nominal <ident>)")
            nominal = str(rest[0][1])
            rest = rest[1:]
        labels = [_label(v) for v in x[3][1:]]
        if len(set(labels)) != len(labels):
            raise ProofFormatError(f"repeated label in {labels}")
        return Rule(str(x[1]), _formula(x[2], sig), frozenset(labels),
                    tuple(_node(c, sig) for c in rest), nominal)
    raise ProofFormatError(f"unknown proof node {x!r}")


def _top(text: str):
    form = read_sexpr(text)
    if not _is_form(form, "proof"):
        raise ProofFormatError("a proof file starts with (proof ...)")
    body = form[1:]
    ref = None
    if body and _is_form(body[0], "theory"):
        if len(body[0]) != 2 or isinstance(body[0][1], (Symbol, int)):
            raise ProofFormatError('(theory "<file>")')
        ref = body[0][1]
        body = body[1:]
    if len(body) != 1:
        raise ProofFormatError("a proof holds exactly one derivation")
    return ref, body[0]


def read_proof(text: str, sig: Signature) -> ProofFile:
    ref, node = _top(text)
    return ProofFile(_node(node, sig), ref)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _write(node: Node, depth: int) -> str:
    pad = "  " * depth
    if isinstance(node, Assume):
        return f"{pad}(assume {node.label} {_quote(print_formula(node.formula))})"
    if isinstance(node, AxiomLeaf):
        return f"{pad}(axiom {_quote(node.name)})"
    if isinstance(node, SchemaLeaf):
        return f"{pad}(schema {_quote(node.name)} {_quote(print_formula(node.formula))})"
    head = (f"{pad}(rule {node.rule} {_quote(print_formula(node.conclusion))} "
            f"(discharge{''.join(f' {n}' for n in sorted(node.discharge))})")
    if node.nominal is not None:
        head += f" (nominal {node.nominal})"
    if not node.children:
        return head + ")"
    return "\n".join([head] + [_write(c, depth + 1) for c in node.children]) + ")"


def write_proof(pf: ProofFile) -> str:
    """Canonical text; ``read_proof`` followed by this is the identity on corpus files."""
    head = "(proof" + (f" (theory {_quote(pf.theory_ref)})" if pf.theory_ref else "")
    return head + "\n" + _write(pf.derivation, 1) + ")\n"


def load_proof_file(path: Path | str, theory: Theory | None = None) -> tuple[ProofFile, Theory]:
    """Read a proof file, loading the theory it names unless one is supplied."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    ref, node = _top(text)
    if theory is None:
        if ref is None:
            raise ProofFormatError(f"{path} names no theory and none was given")
        theory = load_theory_file(path.parent / ref)
    return ProofFile(_node(node, theory.signature), ref), theory
