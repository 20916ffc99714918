"""Free symbols, schema substitution, prenexing and exact evaluation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Set, Tuple

from ..exactalg.polynomial import Polynomial
from ..exactalg.ratfunc import RationalFunction
from ..exactalg.rings import GaussianRational
from .ast import (
    ORDER_RELOPS, And, Atom, Exists, Forall, Formula, Iff, Implies, Not, Or, RelApp,
    Truth,
)
from .parser import ArityMismatch
from .terms import (
    PARAM, VAR, Add, Const, FuncApp, Mul, Neg, Pow, Sub, Sym, Term, eval_term, map_term,
    poly_to_term, substitute_term, term_functions, term_symbols,
)


class UnboundSchemaSymbol(KeyError):
    """A relation or function symbol has no instance."""


class CaptureDetected(RuntimeError):
    """Bound-variable renaming ran out of fresh names."""


# free symbols

@dataclass(frozen=True)
class FreeSymbols:
    variables: FrozenSet[str]
    parameters: FrozenSet[str]
    relations: FrozenSet[str]
    functions: FrozenSet[str]


def _walk_terms(f: Formula):
    """Yield (term, bound_set) for every term position."""
    def go(g, bound):
        if isinstance(g, Atom):
            yield g.lhs, bound
            yield g.rhs, bound
        elif isinstance(g, RelApp):
            for a in g.args:
                yield a, bound
        elif isinstance(g, Not):
            yield from go(g.arg, bound)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                yield from go(a, bound)
        elif isinstance(g, (Implies, Iff)):
            yield from go(g.left, bound)
            yield from go(g.right, bound)
        elif isinstance(g, (Exists, Forall)):
            yield from go(g.body, bound | {g.var})
    yield from go(f, frozenset())


def _relations(f: Formula, out: Set[str]):
    if isinstance(f, RelApp):
        out.add(f.name)
    elif isinstance(f, Not):
        _relations(f.arg, out)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            _relations(a, out)
    elif isinstance(f, (Implies, Iff)):
        _relations(f.left, out)
        _relations(f.right, out)
    elif isinstance(f, (Exists, Forall)):
        _relations(f.body, out)


def free_symbols(f: Formula) -> FreeSymbols:
    variables, params, funcs = set(), set(), set()
    for t, bound in _walk_terms(f):
        for name, kind in term_symbols(t).items():
            if kind == PARAM:
                params.add(name)
            elif name not in bound:
                variables.add(name)
        term_functions(t, funcs)
    rels: Set[str] = set()
    _relations(f, rels)
    return FreeSymbols(frozenset(variables), frozenset(params), frozenset(rels), frozenset(funcs))


def all_names(f: Formula) -> Set[str]:
    names = set()
    for t, _ in _walk_terms(f):
        names.update(term_symbols(t))

    def binders(g):
        if isinstance(g, (Exists, Forall)):
            names.add(g.var)
            binders(g.body)
        elif isinstance(g, Not):
            binders(g.arg)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                binders(a)
        elif isinstance(g, (Implies, Iff)):
            binders(g.left)
            binders(g.right)
    binders(f)
    return names


# structural helpers

def map_atoms(f: Formula, fn) -> Formula:
    """Rebuild ``f`` with ``fn`` applied to every Atom/RelApp/Truth leaf."""
    if isinstance(f, (Atom, RelApp, Truth)):
        return fn(f)
    if isinstance(f, Not):
        return Not(map_atoms(f.arg, fn))
    if isinstance(f, And):
        return And(tuple(map_atoms(a, fn) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(map_atoms(a, fn) for a in f.args))
    if isinstance(f, Implies):
        return Implies(map_atoms(f.left, fn), map_atoms(f.right, fn))
    if isinstance(f, Iff):
        return Iff(map_atoms(f.left, fn), map_atoms(f.right, fn))
    if isinstance(f, Exists):
        return Exists(f.var, map_atoms(f.body, fn))
    if isinstance(f, Forall):
        return Forall(f.var, map_atoms(f.body, fn))
    raise TypeError(f"not a formula: {f!r}")


def _fresh(base: str, taken: Set[str]) -> str:
    for k in range(1, 100000):
        cand = f"{base}_{k}"
        if cand not in taken:
            taken.add(cand)
            return cand
    raise CaptureDetected(f"no fresh name for {base!r}")


def substitute_symbols(f: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Capture-avoiding substitution of terms for free symbols."""
    if not mapping:
        return f
    incoming: Set[str] = set()
    for t in mapping.values():
        incoming.update(term_symbols(t))
    taken = all_names(f) | incoming | set(mapping)

    def go(g, mp):
        if isinstance(g, Atom):
            return Atom(substitute_term(g.lhs, mp), g.op, substitute_term(g.rhs, mp))
        if isinstance(g, RelApp):
            return RelApp(g.name, tuple(substitute_term(a, mp) for a in g.args))
        if isinstance(g, Truth):
            return g
        if isinstance(g, Not):
            return Not(go(g.arg, mp))
        if isinstance(g, And):
            return And(tuple(go(a, mp) for a in g.args))
        if isinstance(g, Or):
            return Or(tuple(go(a, mp) for a in g.args))
        if isinstance(g, Implies):
            return Implies(go(g.left, mp), go(g.right, mp))
        if isinstance(g, Iff):
            return Iff(go(g.left, mp), go(g.right, mp))
        if isinstance(g, (Exists, Forall)):
            inner = {k: v for k, v in mp.items() if k != g.var}
            var = g.var
            if var in incoming and inner:
                new = _fresh(var, taken)
                inner[var] = Sym(new, VAR)
                var = new
            body = go(g.body, inner)
            return type(g)(var, body)
        raise TypeError(f"not a formula: {g!r}")

    return go(f, dict(mapping))


# schema substitution

def _formal_args(inst, arity: int, name: str) -> Tuple[str, ...]:
    params = tuple(inst.params)
    variables = tuple(inst.vars)
    if arity == len(params) + len(variables):
        return params + variables
    if arity == len(variables):
        return variables
    raise ArityMismatch(f"{name!r} applied to {arity} arguments; instance has "
                        f"{len(params)} parameters and {len(variables)} variables")


def _function_value(app: FuncApp, inst) -> RationalFunction:
    if app.name not in inst.functions:
        raise UnboundSchemaSymbol(app.name)
    num, den = inst.functions[app.name]
    formals = _formal_args(inst, len(app.args), app.name)
    args = [_term_value(a, inst) for a in app.args]
    if all(a.is_polynomial() for a in args):
        mp = {v: a.as_polynomial() for v, a in zip(formals, args)}
        return RationalFunction(num.subs(mp), den.subs(mp))
    raise ValueError(f"argument of {app.name!r} is not polynomial")


def _term_value(t: Term, inst) -> RationalFunction:
    """Term value as a rational function, flattening schema functions."""
    if isinstance(t, FuncApp):
        return _function_value(t, inst)
    if isinstance(t, Const):
        return RationalFunction(t.value)
    if isinstance(t, Sym):
        return RationalFunction(Polynomial.var(t.name))
    if isinstance(t, Add):
        return _term_value(t.left, inst) + _term_value(t.right, inst)
    if isinstance(t, Sub):
        return _term_value(t.left, inst) - _term_value(t.right, inst)
    if isinstance(t, Mul):
        return _term_value(t.left, inst) * _term_value(t.right, inst)
    if isinstance(t, Pow):
        return _term_value(t.base, inst) ** t.exp
    if isinstance(t, Neg):
        return -_term_value(t.arg, inst)
    raise TypeError(f"not a term: {t!r}")


def _kinds(inst) -> Dict[str, str]:
    kinds = {p: PARAM for p in inst.params}
    kinds.update({v: VAR for v in inst.vars})
    return kinds


def _flatten_atom(atom: Atom, inst) -> Atom:
    if not (term_functions(atom.lhs) or term_functions(atom.rhs)):
        return atom
    kinds = _kinds(inst)
    for t in (atom.lhs, atom.rhs):
        kinds.update(term_symbols(t))
    lhs = _term_value(atom.lhs, inst)
    rhs = _term_value(atom.rhs, inst)
    if lhs.is_polynomial() and rhs.is_polynomial():
        def flat(t):
            if isinstance(t, FuncApp):
                return poly_to_term(_function_value(t, inst).as_polynomial(), kinds)
            return t
        return Atom(map_term(atom.lhs, flat), atom.op, map_term(atom.rhs, flat))
    # parameter-only denominators: clear them, keeping signs for order relations
    diff = lhs - rhs
    num = diff.num if atom.op not in ORDER_RELOPS else diff.num * diff.den
    return Atom(poly_to_term(num, kinds), atom.op, Const(0))


def substitute_schema(f: Formula, inst) -> Formula:
    """Replace schema relations/functions by their instances.

    ``inst`` provides ``params``, ``vars``, ``relations`` (name -> Formula
    over params+vars) and ``functions`` (name -> (num, den) Polynomials).
    A symbol applied to ``m+n`` arguments binds parameters and variables
    positionally; applied to ``n`` arguments only the variables are bound.
    """
    def leaf(g):
        if isinstance(g, RelApp):
            if g.name not in inst.relations:
                raise UnboundSchemaSymbol(g.name)
            formals = _formal_args(inst, len(g.args), g.name)
            body = inst.relations[g.name]
            # functions inside the arguments are flattened first
            flat_args = []
            for a in g.args:
                if term_functions(a):
                    v = _term_value(a, inst)
                    kinds = _kinds(inst)
                    kinds.update(term_symbols(a))
                    flat_args.append(poly_to_term(v.as_polynomial(), kinds))
                else:
                    flat_args.append(a)
            return substitute_schema(substitute_symbols(body, dict(zip(formals, flat_args))), inst)
        if isinstance(g, Atom):
            return _flatten_atom(g, inst)
        return g

    return map_atoms(f, leaf)


# prenex form

@dataclass(frozen=True)
class PrenexInfo:
    prefix: Tuple[Tuple[str, str], ...]
    matrix: Formula
    alternations: int

    def formula(self) -> Formula:
        out = self.matrix
        for q, v in reversed(self.prefix):
            out = Exists(v, out) if q == "exists" else Forall(v, out)
        return out


def _expand(f: Formula) -> Formula:
    if isinstance(f, Implies):
        return Or((Not(_expand(f.left)), _expand(f.right)))
    if isinstance(f, Iff):
        a, b = _expand(f.left), _expand(f.right)
        return And((Or((Not(a), b)), Or((Not(b), a))))
    if isinstance(f, Not):
        return Not(_expand(f.arg))
    if isinstance(f, And):
        return And(tuple(_expand(a) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(_expand(a) for a in f.args))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, _expand(f.body))
    return f


def _nnf(f: Formula, neg: bool = False) -> Formula:
    if isinstance(f, Not):
        return _nnf(f.arg, not neg)
    if isinstance(f, And):
        parts = tuple(_nnf(a, neg) for a in f.args)
        return Or(parts) if neg else And(parts)
    if isinstance(f, Or):
        parts = tuple(_nnf(a, neg) for a in f.args)
        return And(parts) if neg else Or(parts)
    if isinstance(f, Exists):
        return Forall(f.var, _nnf(f.body, neg)) if neg else Exists(f.var, _nnf(f.body))
    if isinstance(f, Forall):
        return Exists(f.var, _nnf(f.body, neg)) if neg else Forall(f.var, _nnf(f.body))
    if isinstance(f, Truth):
        return Truth(not f.value) if neg else f
    return Not(f) if neg else f


def _rename_apart(f: Formula, taken: Set[str], used_binders: Set[str]) -> Formula:
    """Give every quantifier a distinct variable not free elsewhere."""
    if isinstance(f, (Exists, Forall)):
        var = f.var
        body = f.body
        if var in used_binders:
            new = _fresh(var, taken)
            body = substitute_symbols(body, {var: Sym(new, VAR)})
            var = new
        used_binders.add(var)
        return type(f)(var, _rename_apart(body, taken, used_binders))
    if isinstance(f, And):
        return And(tuple(_rename_apart(a, taken, used_binders) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(_rename_apart(a, taken, used_binders) for a in f.args))
    if isinstance(f, Not):
        return Not(_rename_apart(f.arg, taken, used_binders))
    return f


def _pull(f: Formula):
    if isinstance(f, (Exists, Forall)):
        q = "exists" if isinstance(f, Exists) else "forall"
        prefix, matrix = _pull(f.body)
        return [(q, f.var)] + prefix, matrix
    if isinstance(f, (And, Or)):
        prefix, parts = [], []
        for a in f.args:
            p, m = _pull(a)
            prefix += p
            parts.append(m)
        return prefix, type(f)(tuple(parts))
    return [], f


def prenex(f: Formula) -> PrenexInfo:
    """Equivalent prenex form with quantifier-alternation count."""
    g = _nnf(_expand(f))
    free = free_symbols(g)
    taken = all_names(g)
    g = _rename_apart(g, taken, set(free.variables) | set(free.parameters))
    prefix, matrix = _pull(g)
    alternations = sum(1 for a, b in zip(prefix, prefix[1:]) if a[0] != b[0])
    return PrenexInfo(tuple(prefix), matrix, alternations)


# evaluation

_OPS = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_qf(f: Formula, point: Mapping[str, object]) -> bool:
    """Exact truth value of a quantifier-free, schema-free formula."""
    if isinstance(f, Truth):
        return f.value
    if isinstance(f, Atom):
        a = eval_term(f.lhs, point)
        b = eval_term(f.rhs, point)
        if f.op in ORDER_RELOPS and (isinstance(a, GaussianRational) or isinstance(b, GaussianRational)):
            a, b = GaussianRational.of(a), GaussianRational.of(b)
            if a.im or b.im:
                raise ValueError("order relation on non-real complex values")
            a, b = a.re, b.re
        return _OPS[f.op](a, b)
    if isinstance(f, Not):
        return not eval_qf(f.arg, point)
    if isinstance(f, And):
        return all(eval_qf(a, point) for a in f.args)
    if isinstance(f, Or):
        return any(eval_qf(a, point) for a in f.args)
    if isinstance(f, Implies):
        return (not eval_qf(f.left, point)) or eval_qf(f.right, point)
    if isinstance(f, Iff):
        return eval_qf(f.left, point) == eval_qf(f.right, point)
    if isinstance(f, RelApp):
        raise TypeError(f"schema relation {f.name!r} must be substituted before evaluation")
    raise TypeError("eval_qf needs a quantifier-free formula")


def eval_finite_exists(prefix_vars: Sequence[str], matrix: Formula,
                       candidates: Iterable[Sequence], point: Optional[Mapping[str, object]] = None):
    """``(True, witness)`` if some candidate tuple satisfies ``matrix``."""
    base = dict(point or {})
    for cand in candidates:
        env = dict(base)
        env.update(zip(prefix_vars, cand))
        if eval_qf(matrix, env):
            return True, dict(zip(prefix_vars, cand))
    return False, None


def cube_points(n: int):
    return itertools.product((0, 1), repeat=n)


def eval_finite(f: Formula, domain: Iterable[Sequence], point: Optional[Mapping[str, object]] = None,
                order: Optional[Sequence[str]] = None) -> bool:
    """Evaluate ``f`` with every quantifier ranging over the finite ``domain``
    of scalar values (e.g. ``{0, 1}``)."""
    values = list(domain)
    env = dict(point or {})

    def go(g, env):
        if isinstance(g, Exists):
            return any(go(g.body, {**env, g.var: v}) for v in values)
        if isinstance(g, Forall):
            return all(go(g.body, {**env, g.var: v}) for v in values)
        if isinstance(g, Not):
            return not go(g.arg, env)
        if isinstance(g, And):
            return all(go(a, env) for a in g.args)
        if isinstance(g, Or):
            return any(go(a, env) for a in g.args)
        if isinstance(g, Implies):
            return (not go(g.left, env)) or go(g.right, env)
        if isinstance(g, Iff):
            return go(g.left, env) == go(g.right, env)
        return eval_qf(g, env)

    return go(f, env)
