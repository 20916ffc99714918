"""Term AST for FO(+, *, =, <, 0, 1) with schema function symbols."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Tuple

from ..exactalg.polynomial import Polynomial
from ..exactalg.rational import format_rational, qnorm
from ..exactalg.rings import MissingAssignment

PARAM = "param"
VAR = "var"


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Term):
    value: object

    def __post_init__(self):
        object.__setattr__(self, "value", qnorm(self.value))


@dataclass(frozen=True)
class Sym(Term):
    name: str
    kind: str = VAR


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Mul(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Pow(Term):
    base: Term
    exp: int

    def __post_init__(self):
        if not isinstance(self.exp, int) or self.exp < 0:
            raise ValueError("exponent must be a natural number")


@dataclass(frozen=True)
class Neg(Term):
    arg: Term


@dataclass(frozen=True)
class FuncApp(Term):
    name: str
    args: Tuple[Term, ...]


def term_children(t: Term) -> Tuple[Term, ...]:
    if isinstance(t, (Add, Sub, Mul)):
        return (t.left, t.right)
    if isinstance(t, Pow):
        return (t.base,)
    if isinstance(t, Neg):
        return (t.arg,)
    if isinstance(t, FuncApp):
        return t.args
    return ()


def map_term(t: Term, leaf: Callable[[Term], Term]) -> Term:
    """Rebuild ``t`` bottom-up, applying ``leaf`` to Sym/Const/FuncApp nodes."""
    if isinstance(t, Add):
        return Add(map_term(t.left, leaf), map_term(t.right, leaf))
    if isinstance(t, Sub):
        return Sub(map_term(t.left, leaf), map_term(t.right, leaf))
    if isinstance(t, Mul):
        return Mul(map_term(t.left, leaf), map_term(t.right, leaf))
    if isinstance(t, Pow):
        return Pow(map_term(t.base, leaf), t.exp)
    if isinstance(t, Neg):
        return Neg(map_term(t.arg, leaf))
    if isinstance(t, FuncApp):
        return leaf(FuncApp(t.name, tuple(map_term(a, leaf) for a in t.args)))
    return leaf(t)


def substitute_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    return map_term(t, lambda s: mapping.get(s.name, s) if isinstance(s, Sym) else s)


def term_symbols(t: Term, out=None) -> Dict[str, str]:
    out = {} if out is None else out
    if isinstance(t, Sym):
        out.setdefault(t.name, t.kind)
    for c in term_children(t):
        term_symbols(c, out)
    return out


def term_functions(t: Term, out=None) -> set:
    out = set() if out is None else out
    if isinstance(t, FuncApp):
        out.add(t.name)
    for c in term_children(t):
        term_functions(c, out)
    return out


def eval_term(t: Term, point: Mapping[str, object]):
    """Exact value of a function-free term at a point."""
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Sym):
        if t.name not in point:
            raise MissingAssignment(t.name)
        return point[t.name]
    if isinstance(t, Add):
        return eval_term(t.left, point) + eval_term(t.right, point)
    if isinstance(t, Sub):
        return eval_term(t.left, point) - eval_term(t.right, point)
    if isinstance(t, Mul):
        return eval_term(t.left, point) * eval_term(t.right, point)
    if isinstance(t, Pow):
        return eval_term(t.base, point) ** t.exp
    if isinstance(t, Neg):
        return -eval_term(t.arg, point)
    raise TypeError(f"cannot evaluate schema function application {t!r}")


def term_to_poly(t: Term) -> Polynomial:
    if isinstance(t, Const):
        return Polynomial.const(t.value)
    if isinstance(t, Sym):
        return Polynomial.var(t.name)
    if isinstance(t, Add):
        return term_to_poly(t.left) + term_to_poly(t.right)
    if isinstance(t, Sub):
        return term_to_poly(t.left) - term_to_poly(t.right)
    if isinstance(t, Mul):
        return term_to_poly(t.left) * term_to_poly(t.right)
    if isinstance(t, Pow):
        return term_to_poly(t.base) ** t.exp
    if isinstance(t, Neg):
        return -term_to_poly(t.arg)
    raise TypeError(f"schema function application {t.name!r} has no polynomial value")


def poly_to_term(p: Polynomial, kinds: Mapping[str, str] = None) -> Term:
    """Sum-of-monomials term for ``p``; symbol kinds default to variables."""
    kinds = kinds or {}
    out = None
    for exps, c in p.items():
        factors = []
        for v, k in zip(p.indeterminates, exps):
            if k:
                s = Sym(v, kinds.get(v, VAR))
                factors.append(s if k == 1 else Pow(s, k))
        neg = c < 0
        a = -c if neg else c
        mono = None
        if a != 1 or not factors:
            mono = Const(a)
        for f in factors:
            mono = f if mono is None else Mul(mono, f)
        if out is None:
            out = Neg(mono) if neg else mono
        else:
            out = Sub(out, mono) if neg else Add(out, mono)
    return Const(0) if out is None else out


# rendering: levels sum=1 < prod=2 < pow=3 < unary=4 < primary=5
def _level(t: Term) -> int:
    if isinstance(t, (Add, Sub)):
        return 1
    if isinstance(t, Mul):
        return 2
    if isinstance(t, Pow):
        return 3
    if isinstance(t, Neg):
        return 4
    return 5


def render_term(t: Term, need: int = 0) -> str:
    if isinstance(t, Const):
        s = format_rational(t.value)
        body = s if t.value >= 0 else f"({s})"
    elif isinstance(t, Sym):
        body = t.name
    elif isinstance(t, FuncApp):
        body = f"{t.name}({', '.join(render_term(a) for a in t.args)})"
    elif isinstance(t, Add):
        body = f"{render_term(t.left, 1)} + {render_term(t.right, 2)}"
    elif isinstance(t, Sub):
        body = f"{render_term(t.left, 1)} - {render_term(t.right, 2)}"
    elif isinstance(t, Mul):
        body = f"{render_term(t.left, 2)}*{render_term(t.right, 3)}"
    elif isinstance(t, Pow):
        body = f"{render_term(t.base, 4)}^{t.exp}"
    elif isinstance(t, Neg):
        body = f"-{render_term(t.arg, 4)}"
    else:
        raise TypeError(f"not a term: {t!r}")
    if _level(t) < need:
        return f"({body})"
    return body
