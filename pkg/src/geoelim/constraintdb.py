"""Constraint databases with a parameter/variable split.

An instance is one algebraic family: relations are quantifier-free formulas
over ``params + vars`` and functions are polynomials in the variables whose
coefficients are rational functions of the parameters.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Mapping, Sequence, Tuple

from .circuit import InadmissiblePoint
from .exactalg.polynomial import Polynomial
from .exactalg.rational import format_rational, is_rational, qnorm
from .exactalg.rings import QQ, GaussianField, GaussianRational, poly_eval_generic
from .formula.ast import ORDER_RELOPS, Atom, Formula, Truth, is_quantifier_free
from .formula.logic import eval_qf, free_symbols, map_atoms
from .formula.parser import Context, parse
from .formula.terms import Const, poly_to_term, term_to_poly
from .verdict import Fail, Pass


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Schema:
    relations: Tuple[Tuple[str, int], ...]
    functions: Tuple[Tuple[str, int], ...]
    param_count: int
    var_count: int
    field_mode: str = "real"

    def __post_init__(self):
        names = [n for n, _ in self.relations] + [n for n, _ in self.functions]
        if len(names) != len(set(names)):
            raise SchemaError("schema symbol names must be unique")
        if any(a < 0 for _, a in self.relations + self.functions):
            raise SchemaError("arities must be non-negative")
        if self.field_mode not in ("real", "complex"):
            raise SchemaError(f"unknown field mode {self.field_mode!r}")

    def is_geometric(self) -> bool:
        k = self.param_count + self.var_count
        return all(a == k for _, a in self.relations + self.functions)


@dataclass(frozen=True)
class Instance:
    params: Tuple[str, ...]
    vars: Tuple[str, ...]
    relations: Mapping[str, Formula] = field(default_factory=dict)
    functions: Mapping[str, Tuple[Polynomial, Polynomial]] = field(default_factory=dict)
    mode: str = "real"

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "vars", tuple(self.vars))
        if set(self.params) & set(self.vars):
            raise SchemaError("parameters and variables overlap")
        funcs = {}
        for name, fd in self.functions.items():
            if isinstance(fd, tuple):
                num, den = fd
            else:
                num, den = fd, 1
            num = num if isinstance(num, Polynomial) else Polynomial.const(num)
            den = den if isinstance(den, Polynomial) else Polynomial.const(den)
            if den.is_zero():
                raise SchemaError(f"function {name!r} has a zero denominator")
            bad = [v for v in den.used_variables() if v not in self.params]
            if bad:
                raise SchemaError(f"denominator of {name!r} uses non-parameter {bad[0]!r}")
            bad = [v for v in num.used_variables() if v not in self.params + self.vars]
            if bad:
                raise SchemaError(f"function {name!r} uses undeclared symbol {bad[0]!r}")
            funcs[name] = (num, den)
        object.__setattr__(self, "functions", funcs)
        rels = dict(self.relations)
        for name, f in rels.items():
            if not is_quantifier_free(f):
                raise SchemaError(f"relation {name!r} is not quantifier-free")
            fs = free_symbols(f)
            bad = sorted(v for v in fs.parameters | fs.variables if v not in self.params + self.vars)
            if bad:
                raise SchemaError(f"relation {name!r} uses undeclared symbol {bad[0]!r}")
        object.__setattr__(self, "relations", rels)

    @property
    def m(self) -> int:
        return len(self.params)

    @property
    def n(self) -> int:
        return len(self.vars)

    def schema(self) -> Schema:
        k = self.m + self.n
        return Schema(tuple((r, k) for r in self.relations), tuple((f, k) for f in self.functions),
                      self.m, self.n, self.mode)

    def without_function(self, name: str) -> "Instance":
        funcs = {k: v for k, v in self.functions.items() if k != name}
        return Instance(self.params, self.vars, self.relations, funcs, self.mode)


ParameterPoint = Tuple


def point_dict(inst: Instance, p) -> Dict[str, object]:
    if isinstance(p, Mapping):
        missing = [u for u in inst.params if u not in p]
        if missing:
            raise ValueError(f"parameter point lacks {missing[0]!r}")
        return dict(p)
    p = tuple(p)
    if len(p) != inst.m:
        raise ValueError(f"parameter point has {len(p)} coordinates, schema has m={inst.m}")
    return {u: (c if isinstance(c, GaussianRational) else qnorm(c)) for u, c in zip(inst.params, p)}


def _ring_for(point: Mapping[str, object]):
    return GaussianField() if any(isinstance(v, GaussianRational) for v in point.values()) else QQ


def _peval(p: Polynomial, point: Mapping[str, object]):
    ring = _ring_for(point)
    sub = {v: point[v] for v in p.used_variables()}
    return poly_eval_generic(p, sub, ring)


def is_admissible(inst: Instance, p) -> bool:
    point = point_dict(inst, p)
    return all(not _is_zero(_peval(den, point)) for _, den in inst.functions.values())


def _is_zero(v) -> bool:
    return v == 0


# specialization

def specialize_function(inst: Instance, name: str, p) -> Polynomial:
    """``F(u, x)`` at the parameter point: a polynomial in the variables."""
    point = point_dict(inst, p)
    num, den = inst.functions[name]
    d = _peval(den, point)
    if _is_zero(d):
        raise InadmissiblePoint(f"denominator of {name!r} vanishes at {tuple(point.values())}")
    if any(isinstance(v, GaussianRational) for v in point.values()):
        raise NotImplementedError("function specialization is implemented for rational points")
    return num.subs({u: point[u] for u in inst.params}) / d


def _atom_poly(a: Atom, point: Mapping[str, object]) -> Polynomial:
    p = term_to_poly(a.lhs) - term_to_poly(a.rhs)
    return p.subs({u: point[u] for u in p.used_variables() if u in point})


def normalize_atom(p: Polynomial, op: str) -> Formula:
    """Canonical atom ``p' op 0`` with the same solution set as ``p op 0``.

    ``p`` is divided by its leading coefficient (its absolute value for
    order relations, which must not flip); constant atoms become truth
    values.
    """
    if p.is_constant():
        c = p.constant_value()
        return Truth({"=": c == 0, "!=": c != 0, "<": c < 0, "<=": c <= 0,
                      ">": c > 0, ">=": c >= 0}[op])
    p = p.with_indeterminates(sorted(p.used_variables()))
    lc = p.leading_coefficient()
    if op in ORDER_RELOPS:
        lc = abs(lc)
    q = p / lc
    return Atom(poly_to_term(q), op, Const(0))


def specialize_relation(inst: Instance, name: str, p, normalize: bool = True) -> Formula:
    point = point_dict(inst, p)
    f = inst.relations[name]

    def leaf(g):
        if isinstance(g, Atom):
            poly = _atom_poly(g, point)
            if normalize:
                return normalize_atom(poly, g.op)
            return Atom(poly_to_term(poly), g.op, Const(0))
        return g

    return map_atoms(f, leaf)


# verdicts

@dataclass(frozen=True)
class Equivalent:
    kind = "Equivalent"


@dataclass(frozen=True)
class NotEquivalent:
    witness: object
    kind = "NotEquivalent"


@dataclass(frozen=True)
class Unknown:
    reason: str = ""
    kind = "Unknown"


def _grid(n: int, budget: int, rng: random.Random) -> Iterator[Tuple]:
    """Integer box points first, then random small rationals."""
    box = range(-3, 4)
    count = 0
    if 7 ** n <= budget:
        for pt in itertools.product(box, repeat=n):
            yield pt
            count += 1
    while count < budget:
        yield tuple(Fraction(rng.randint(-20, 20), rng.randint(1, 6)) for _ in range(n))
        count += 1


def params_equivalent(inst: Instance, p1, p2, grid_budget: int = 400, seed: int = 0):
    """Decide whether two parameter points specialize to the same instance."""
    for p in (p1, p2):
        if not is_admissible(inst, p):
            raise InadmissiblePoint(f"parameter point {tuple(p)} is not admissible")
    for name in inst.functions:
        a, b = specialize_function(inst, name, p1), specialize_function(inst, name, p2)
        if a != b:
            return NotEquivalent(("function", name, tuple(p1), tuple(p2), str(a), str(b)))
    pending = []
    for name in inst.relations:
        a, b = specialize_relation(inst, name, p1), specialize_relation(inst, name, p2)
        if a != b:
            pending.append((name, a, b))
    if not pending:
        return Equivalent()
    rng = random.Random(seed)
    for name, a, b in pending:
        for x in _grid(inst.n, grid_budget, rng):
            pt = dict(zip(inst.vars, x))
            if eval_qf(a, pt) != eval_qf(b, pt):
                return NotEquivalent(("relation", name, tuple(x)))
    return Unknown("specialized relations differ syntactically but no separating point was found")


# geometric-query harness

class QueryEvaluationError(RuntimeError):
    pass


class NoEquivalentPairs(LookupError):
    pass


PairGenerator = Callable[[random.Random], Tuple[Tuple, Tuple]]


def check_geometric_invariance(query_eval: Callable[[Instance], Instance], inst: Instance,
                               pair_generator: PairGenerator, trials: int = 100, seed: int = 0):
    """Every equivalent pair on ``inst`` must stay admissible and equivalent on the query output."""
    try:
        out = query_eval(inst)
    except Exception as exc:
        raise QueryEvaluationError(f"query evaluation failed: {exc}") from exc
    for k in range(trials):
        rng = random.Random(f"{seed}:{k}")
        p1, p2 = pair_generator(rng)
        p1, p2 = tuple(p1), tuple(p2)
        pre = params_equivalent(inst, p1, p2)
        if pre.kind != "Equivalent":
            raise ValueError(f"pair generator produced a non-equivalent pair {p1}, {p2}")
        if not (is_admissible(out, p1) and is_admissible(out, p2)):
            return Fail((p1, p2), "inadmissible on the output")
        try:
            verdict = params_equivalent(out, p1, p2)
        except Exception as exc:
            raise QueryEvaluationError(f"comparing outputs at {p1}, {p2}: {exc}") from exc
        if verdict.kind != "Equivalent":
            return Fail((p1, p2), verdict)
    return Pass(trials)


def _small_rational(rng: random.Random, lo=-9, hi=9, dens=(1, 1, 1, 2, 3)) -> Fraction:
    return qnorm(Fraction(rng.randint(lo, hi), rng.choice(dens)))


def product_pair_generator(m: int, i: int = 0, j: int = 1) -> PairGenerator:
    """Pairs keeping ``u_i*u_j`` fixed; other coordinates shared.

    Half the trials use the zero product ``(a,0)`` vs ``(0,b)``, the rest a
    rescaling ``(a,b)`` vs ``(a*k, b/k)``.
    """
    def gen(rng: random.Random):
        base = [_small_rational(rng) for _ in range(m)]
        p1, p2 = list(base), list(base)
        if rng.random() < 0.5:
            p1[i], p1[j] = _small_rational(rng), 0
            p2[i], p2[j] = 0, _small_rational(rng)
        else:
            a, b = _small_rational(rng), _small_rational(rng)
            k = qnorm(Fraction(rng.choice([-3, -2, -1, 2, 3]), rng.choice([1, 2])))
            p1[i], p1[j] = a, b
            p2[i], p2[j] = qnorm(a * k), qnorm(Fraction(b) / k)
        return tuple(p1), tuple(p2)

    return gen


def difference_pair_generator(m: int, i: int = 0, j: int = 1) -> PairGenerator:
    """Pairs keeping ``u_i - u_j`` fixed (both shifted by the same amount)."""
    def gen(rng: random.Random):
        base = [_small_rational(rng) for _ in range(m)]
        c = _small_rational(rng)
        p2 = list(base)
        p2[i] = qnorm(base[i] + c)
        p2[j] = qnorm(base[j] + c)
        return tuple(base), tuple(p2)

    return gen


def fingerprint(inst: Instance, p) -> Tuple:
    """Hashable canonical form of the specialized instance."""
    funcs = tuple((n, specialize_function(inst, n, p)) for n in sorted(inst.functions))
    rels = tuple((n, specialize_relation(inst, n, p)) for n in sorted(inst.relations))
    return funcs, rels


def equivalent_pair_search(inst: Instance, box: Sequence = range(-2, 3)) -> Iterator[Tuple[Tuple, Tuple]]:
    """Enumerate all distinct syntactically equivalent pairs in an integer box.

    Points are bucketed by :func:`fingerprint`; pairs sharing a bucket are
    yielded in a deterministic order.
    """
    buckets: Dict[Tuple, List[Tuple]] = {}
    for p in itertools.product(box, repeat=inst.m):
        if is_admissible(inst, p):
            buckets.setdefault(fingerprint(inst, p), []).append(p)
    for pts in buckets.values():
        for a, b in itertools.combinations(pts, 2):
            yield a, b


def search_pair_generator(inst: Instance, box: Sequence = range(-2, 3)) -> PairGenerator:
    pairs = list(equivalent_pair_search(inst, box))
    if not pairs:
        raise NoEquivalentPairs("no equivalent non-equal pairs in the search box")

    def gen(rng: random.Random):
        return rng.choice(pairs)

    return gen


# file format

def instance_from_json(doc: Mapping) -> Instance:
    mode = doc.get("mode", "real")
    params = tuple(doc.get("params", ()))
    vars = tuple(doc.get("vars", ()))
    ctx = Context(params=params, vars=vars, mode=mode, strict=True)
    rels = {name: parse(text, ctx) for name, text in doc.get("relations", {}).items()}
    funcs = {}
    for name, fd in doc.get("functions", {}).items():
        if isinstance(fd, str):
            fd = {"num": fd}
        num = Polynomial.parse(fd["num"], params + vars)
        den = Polynomial.parse(str(fd.get("den", "1")), params)
        funcs[name] = (num.with_indeterminates(params + vars), den)
    return Instance(params, vars, rels, funcs, mode)


def instance_to_json(inst: Instance) -> dict:
    return {
        "mode": inst.mode,
        "params": list(inst.params),
        "vars": list(inst.vars),
        "relations": {k: str(f) for k, f in inst.relations.items()},
        "functions": {k: {"num": str(num), "den": str(den)} for k, (num, den) in inst.functions.items()},
    }


def load_database(path: str) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return instance_from_json(json.load(fh))


def format_point(p) -> str:
    return "(" + ",".join(format_rational(c) if is_rational(c) else str(c) for c in p) + ")"
