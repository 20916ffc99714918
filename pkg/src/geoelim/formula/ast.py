"""Formula AST and its rendering in the concrete syntax accepted by the parser."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from .terms import Term, render_term

RELOPS = ("=", "!=", "<", "<=", ">", ">=")
ORDER_RELOPS = ("<", "<=", ">", ">=")


class Formula:
    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return And((self, other))

    def __or__(self, other: "Formula") -> "Formula":
        return Or((self, other))

    def __invert__(self) -> "Formula":
        return Not(self)

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Atom(Formula):
    lhs: Term
    op: str
    rhs: Term

    def __post_init__(self):
        if self.op not in RELOPS:
            raise ValueError(f"unknown relation operator {self.op!r}")


@dataclass(frozen=True)
class RelApp(Formula):
    name: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class Truth(Formula):
    value: bool


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: Tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: Tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


TRUE = Truth(True)
FALSE = Truth(False)


def conj(*parts: Formula) -> Formula:
    parts = tuple(parts)
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else And(parts)


def disj(*parts: Formula) -> Formula:
    parts = tuple(parts)
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else Or(parts)


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Exists, Forall)):
        return False
    if isinstance(f, Not):
        return is_quantifier_free(f.arg)
    if isinstance(f, (And, Or)):
        return all(is_quantifier_free(a) for a in f.args)
    if isinstance(f, (Implies, Iff)):
        return is_quantifier_free(f.left) and is_quantifier_free(f.right)
    return True


# precedence: quantifier 0 < iff/implies 1 < or 2 < and 3 < not/atom 4
def _flevel(f: Formula) -> int:
    if isinstance(f, (Exists, Forall)):
        return 0
    if isinstance(f, (Implies, Iff)):
        return 1
    if isinstance(f, Or):
        return 2
    if isinstance(f, And):
        return 3
    return 4


def render(f: Formula, need: int = 0) -> str:
    """Concrete syntax for ``f``; ``parse(render(f))`` rebuilds ``f``."""
    if isinstance(f, Atom):
        body = f"{render_term(f.lhs)} {f.op} {render_term(f.rhs)}"
    elif isinstance(f, RelApp):
        body = f"{f.name}({', '.join(render_term(a) for a in f.args)})"
    elif isinstance(f, Truth):
        body = "true" if f.value else "false"
    elif isinstance(f, Not):
        body = f"not {render(f.arg, 4)}"
    elif isinstance(f, And):
        body = " and ".join(render(a, 4) for a in f.args)
    elif isinstance(f, Or):
        body = " or ".join(render(a, 3) for a in f.args)
    elif isinstance(f, Implies):
        body = f"{render(f.left, 2)} -> {render(f.right, 2)}"
    elif isinstance(f, Iff):
        body = f"{render(f.left, 2)} <-> {render(f.right, 2)}"
    elif isinstance(f, Exists):
        body = f"exists {f.var}: {render(f.body, 0)}"
    elif isinstance(f, Forall):
        body = f"forall {f.var}: {render(f.body, 0)}"
    else:
        raise TypeError(f"not a formula: {f!r}")
    if _flevel(f) < need:
        return f"({body})"
    return body
