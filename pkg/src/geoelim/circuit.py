"""Essentially division-free arithmetic circuits (straight-line programs).

Nodes are stored in topological order; node ``i`` may only refer to nodes
``< i``.  Scalars are rational functions of the parameters, so admissibility
of a parameter point is decided exactly: a vanishing scalar denominator
raises :class:`InadmissiblePoint` rather than being limit-evaluated.
"""

from __future__ import annotations

import json
from fractions import Fraction
from dataclasses import dataclass
from math import isqrt
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .exactalg.polynomial import Polynomial
from .exactalg.ratfunc import RationalFunction
from .exactalg.rational import format_rational, is_rational, parse_rational, qnorm
from .exactalg.rings import QQ, MissingAssignment, Ring, RingMismatch, poly_eval_generic

OPS = ("param", "var", "const", "scalar", "add", "sub", "mul", "div")
ARITH = ("add", "sub", "mul", "div")
SIGN_MARKS = ("=0", "!=0", "<0", "<=0", ">0", ">=0")
ORDER_MARKS = ("<0", "<=0", ">0", ">=0")


class InadmissiblePoint(ValueError):
    """A scalar or divisor is undefined at the requested parameter point."""

    def __init__(self, message: str, node: Optional[int] = None):
        super().__init__(message)
        self.node = node


class CircuitError(ValueError):
    """Structurally invalid circuit."""


@dataclass(frozen=True)
class Node:
    op: str
    args: Tuple[int, ...] = ()
    name: Optional[str] = None
    value: object = None


@dataclass(frozen=True)
class Circuit:
    params: Tuple[str, ...]
    vars: Tuple[str, ...]
    nodes: Tuple[Node, ...]
    outputs: Tuple[Tuple[int, Optional[str]], ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "outputs", tuple((int(i), m) for i, m in self.outputs))

    def __len__(self) -> int:
        return len(self.nodes)

    def output_ids(self) -> List[int]:
        return [i for i, _ in self.outputs]


class CircuitBuilder:
    """Append-only helper producing a :class:`Circuit`.

    Leaf nodes are memoized so repeated ``var("x1")`` calls share one node.
    """

    def __init__(self, params: Sequence[str] = (), vars: Sequence[str] = ()):
        self.params = tuple(params)
        self.vars = tuple(vars)
        self.nodes: List[Node] = []
        self.outputs: List[Tuple[int, Optional[str]]] = []
        self._leaves: Dict[tuple, int] = {}

    def _push(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def _leaf(self, key, node: Node) -> int:
        if key not in self._leaves:
            self._leaves[key] = self._push(node)
        return self._leaves[key]

    def param(self, name: str) -> int:
        return self._leaf(("param", name), Node("param", name=name))

    def var(self, name: str) -> int:
        return self._leaf(("var", name), Node("var", name=name))

    def const(self, c) -> int:
        c = qnorm(c)
        return self._leaf(("const", c), Node("const", value=c))

    def scalar(self, value) -> int:
        rf = RationalFunction.of(value)
        if rf.is_constant():
            return self.const(rf.constant_value())
        return self._push(Node("scalar", value=rf))

    def add(self, a: int, b: int) -> int:
        return self._push(Node("add", (a, b)))

    def sub(self, a: int, b: int) -> int:
        return self._push(Node("sub", (a, b)))

    def mul(self, a: int, b: int) -> int:
        return self._push(Node("mul", (a, b)))

    def div(self, a: int, b: int) -> int:
        return self._push(Node("div", (a, b)))

    def output(self, node: int, mark: Optional[str] = None) -> None:
        self.outputs.append((node, mark))

    def build(self) -> Circuit:
        return Circuit(self.params, self.vars, tuple(self.nodes), tuple(self.outputs))


# structure

def _dependencies(c: Circuit) -> List[Tuple[bool, bool]]:
    """Per node: (depends on variables, depends on parameters)."""
    deps = []
    for node in c.nodes:
        if node.op == "var":
            deps.append((True, False))
        elif node.op == "param":
            deps.append((False, True))
        elif node.op == "const":
            deps.append((False, False))
        elif node.op == "scalar":
            deps.append((False, not node.value.is_constant()))
        else:
            a, b = (deps[i] for i in node.args)
            deps.append((a[0] or b[0], a[1] or b[1]))
    return deps


@dataclass(frozen=True)
class Validation:
    kind: str  # "totally-division-free" | "essentially-division-free" | "invalid"
    diagnostic: str = ""

    @property
    def ok(self) -> bool:
        return self.kind != "invalid"


def validate(c: Circuit, real_mode: bool = True) -> Validation:
    if set(c.params) & set(c.vars):
        return Validation("invalid", "parameters and variables overlap")
    for i, node in enumerate(c.nodes):
        if node.op not in OPS:
            return Validation("invalid", f"node {i}: unknown op {node.op!r}")
        if node.op in ARITH:
            if len(node.args) != 2:
                return Validation("invalid", f"node {i}: {node.op} needs two arguments")
            for a in node.args:
                if not isinstance(a, int) or a < 0 or a >= len(c.nodes):
                    return Validation("invalid", f"node {i}: dangling argument {a}")
                if a >= i:
                    return Validation("invalid", f"node {i}: argument {a} does not precede it (cycle)")
        elif node.args:
            return Validation("invalid", f"node {i}: {node.op} takes no arguments")
        if node.op == "param" and node.name not in c.params:
            return Validation("invalid", f"node {i}: unknown parameter {node.name!r}")
        if node.op == "var" and node.name not in c.vars:
            return Validation("invalid", f"node {i}: unknown variable {node.name!r}")
        if node.op == "const" and not is_rational(node.value):
            return Validation("invalid", f"node {i}: constant is not rational")
        if node.op == "scalar":
            if not isinstance(node.value, RationalFunction):
                return Validation("invalid", f"node {i}: scalar is not a rational function")
            stray = [v for v in node.value.used_variables() if v not in c.params]
            if stray:
                return Validation("invalid", f"node {i}: scalar uses non-parameter {stray[0]!r}")
    for i, mark in c.outputs:
        if not 0 <= i < len(c.nodes):
            return Validation("invalid", f"output refers to missing node {i}")
        if mark is not None and mark not in SIGN_MARKS:
            return Validation("invalid", f"unknown sign mark {mark!r}")
        if mark in ORDER_MARKS and not real_mode:
            return Validation("invalid", f"order sign mark {mark!r} outside real mode")
    deps = _dependencies(c)
    total = True
    for i, node in enumerate(c.nodes):
        if node.op != "div":
            continue
        d = node.args[1]
        if deps[d][0]:
            return Validation("invalid", f"node {i}: divisor depends on the variables")
        if deps[d][1]:
            total = False
        else:
            value = _constant_value(c, d)
            if value == 0:
                return Validation("invalid", f"node {i}: division by the constant zero")
    return Validation("totally-division-free" if total else "essentially-division-free")


def _constant_value(c: Circuit, idx: int):
    vals: Dict[int, object] = {}

    def go(i):
        if i in vals:
            return vals[i]
        node = c.nodes[i]
        if node.op == "const":
            v = node.value
        elif node.op == "scalar":
            v = node.value.constant_value()
        else:
            a, b = go(node.args[0]), go(node.args[1])
            if node.op == "add":
                v = a + b
            elif node.op == "sub":
                v = a - b
            elif node.op == "mul":
                v = a * b
            else:
                v = 0 if b == 0 else qnorm(Fraction(a) / b)
        vals[i] = v
        return v

    return go(idx)


def _require_valid(c: Circuit) -> Validation:
    v = validate(c)
    if not v.ok:
        raise CircuitError(v.diagnostic)
    return v


# evaluation

def _scalar_value(node: Node, idx: int, param_assign: Mapping[str, object], ring: Ring):
    rf: RationalFunction = node.value
    if rf.den.is_constant():
        num = poly_eval_generic(rf.num, param_assign, ring)
        return ring.scale(num, qnorm(Fraction(1) / rf.den.constant_value()))
    point = {}
    for v in rf.used_variables():
        if v not in param_assign:
            raise MissingAssignment(v)
        if not is_rational(param_assign[v]):
            raise RingMismatch("scalars with denominators need rational parameter values")
        point[v] = param_assign[v]
    try:
        return ring.from_rational(rf.evaluate(point))
    except ZeroDivisionError:
        raise InadmissiblePoint(f"scalar node {idx} has a vanishing denominator", idx) from None


def eval_in_ring(c: Circuit, param_assign: Mapping[str, object], var_assign: Mapping[str, object],
                 ring: Ring = QQ) -> list:
    """Straight-line evaluation; one ring element per output."""
    _require_valid(c)
    deps = _dependencies(c)
    vals: List[object] = []
    rational_vals: Dict[int, object] = {}
    rational_params = all(is_rational(param_assign.get(p, 0)) for p in c.params)
    for i, node in enumerate(c.nodes):
        op = node.op
        if op == "param":
            if node.name not in param_assign:
                raise MissingAssignment(node.name)
            v = ring.coerce(param_assign[node.name])
            if rational_params:
                rational_vals[i] = qnorm(param_assign[node.name])
        elif op == "var":
            if node.name not in var_assign:
                raise MissingAssignment(node.name)
            v = ring.coerce(var_assign[node.name])
        elif op == "const":
            v = ring.from_rational(node.value)
            rational_vals[i] = node.value
        elif op == "scalar":
            v = _scalar_value(node, i, param_assign, ring)
            if rational_params:
                try:
                    rational_vals[i] = node.value.evaluate({p: param_assign[p] for p in node.value.used_variables()})
                except ZeroDivisionError:
                    raise InadmissiblePoint(f"scalar node {i} has a vanishing denominator", i) from None
        else:
            a, b = node.args
            if op == "add":
                v = ring.add(vals[a], vals[b])
            elif op == "sub":
                v = ring.sub(vals[a], vals[b])
            elif op == "mul":
                v = ring.mul(vals[a], vals[b])
            else:
                if b not in rational_vals:
                    raise RingMismatch("division needs rational parameter values")
                d = rational_vals[b]
                if d == 0:
                    if deps[b][1]:
                        raise InadmissiblePoint(f"divisor node {b} vanishes at the parameter point", b)
                    raise ZeroDivisionError(f"division by zero at node {i}")
                v = ring.scale(vals[a], Fraction(1) / d)
            if i not in rational_vals and a in rational_vals and b in rational_vals:
                x, y = rational_vals[a], rational_vals[b]
                if op == "add":
                    rational_vals[i] = qnorm(x + y)
                elif op == "sub":
                    rational_vals[i] = qnorm(x - y)
                elif op == "mul":
                    rational_vals[i] = qnorm(x * y)
                elif y != 0:
                        rational_vals[i] = qnorm(Fraction(x) / y)
        vals.append(v)
    return [vals[i] for i, _ in c.outputs]


def node_values_symbolic(c: Circuit) -> List[RationalFunction]:
    """Every node as a rational function of params and vars (param-only denominators)."""
    _require_valid(c)
    vals: List[RationalFunction] = []
    for node in c.nodes:
        op = node.op
        if op in ("param", "var"):
            v = RationalFunction(Polynomial.var(node.name))
        elif op == "const":
            v = RationalFunction(node.value)
        elif op == "scalar":
            v = node.value
        else:
            a, b = vals[node.args[0]], vals[node.args[1]]
            if op == "add":
                v = a + b
            elif op == "sub":
                v = a - b
            elif op == "mul":
                v = a * b
            else:
                v = a / b
        vals.append(v)
    return vals


def expand_to_polynomials(c: Circuit) -> List[RationalFunction]:
    """Symbolic value of each output over QQ(params)[vars]."""
    if not c.outputs:
        return []
    vals = node_values_symbolic(c)
    return [vals[i] for i, _ in c.outputs]


def _param_point(c: Circuit, point) -> Dict[str, object]:
    if isinstance(point, Mapping):
        return {k: qnorm(v) for k, v in point.items()}
    point = list(point)
    if len(point) != len(c.params):
        raise ValueError(f"parameter point has {len(point)} coordinates, circuit has {len(c.params)} parameters")
    return {p: qnorm(v) for p, v in zip(c.params, point)}


def specialize_params(c: Circuit, point) -> Circuit:
    """Division-free circuit over ``vars`` only: parameters and scalars become constants.

    Parameter-only subcircuits are folded to constants and divisions by
    constants become multiplications by the inverse.
    """
    _require_valid(c)
    env = _param_point(c, point)
    deps = _dependencies(c)
    b = CircuitBuilder((), c.vars)
    remap: Dict[int, int] = {}
    const_of: Dict[int, object] = {}
    for i, node in enumerate(c.nodes):
        op = node.op
        if op == "var":
            remap[i] = b.var(node.name)
            continue
        if not deps[i][0]:
            # parameter/constant-only subexpression
            if op == "param":
                if node.name not in env:
                    raise MissingAssignment(node.name)
                val = env[node.name]
            elif op == "const":
                val = node.value
            elif op == "scalar":
                try:
                    val = node.value.evaluate(env)
                except ZeroDivisionError:
                    raise InadmissiblePoint(f"scalar node {i} has a vanishing denominator", i) from None
            else:
                x, y = const_of[node.args[0]], const_of[node.args[1]]
                if op == "add":
                    val = x + y
                elif op == "sub":
                    val = x - y
                elif op == "mul":
                    val = x * y
                else:
                    if y == 0:
                        raise InadmissiblePoint(f"divisor node {node.args[1]} vanishes", node.args[1])
                    val = Fraction(x) / y
            const_of[i] = qnorm(val)
            continue
        a, d = node.args
        ia = remap[a] if a in remap else b.const(const_of[a])
        if op == "div":
            y = const_of[d]
            if y == 0:
                raise InadmissiblePoint(f"divisor node {d} vanishes", d)
            remap[i] = b.mul(ia, b.const(Fraction(1) / y))
            continue
        idd = remap[d] if d in remap else b.const(const_of[d])
        remap[i] = {"add": b.add, "sub": b.sub, "mul": b.mul}[op](ia, idd)
    for i, mark in c.outputs:
        b.output(remap[i] if i in remap else b.const(const_of[i]), mark)
    return b.build()


# metrics

@dataclass(frozen=True)
class CircuitMetrics:
    total_size: int
    depth: int
    nonscalar_over_Q: int
    nonscalar_over_K: int

    def as_dict(self) -> dict:
        return {"total_size": self.total_size, "depth": self.depth,
                "nonscalar_over_Q": self.nonscalar_over_Q,
                "nonscalar_over_K": self.nonscalar_over_K}


def metrics(c: Circuit) -> CircuitMetrics:
    _require_valid(c)
    deps = _dependencies(c)
    depth = [0] * len(c.nodes)
    size = over_q = over_k = 0
    for i, node in enumerate(c.nodes):
        if node.op not in ARITH:
            continue
        size += 1
        a, b = node.args
        depth[i] = 1 + max(depth[a], depth[b])
        if node.op in ("mul", "div"):
            qa = not deps[a][0] and not deps[a][1]
            qb = not deps[b][0] and not deps[b][1]
            if not qa and not qb:
                over_q += 1
            if deps[a][0] and deps[b][0]:
                over_k += 1
    return CircuitMetrics(size, max(depth, default=0), over_q, over_k)


@dataclass(frozen=True)
class ComplexityBounds:
    L: int
    t: int
    q: int
    m: int

    def L_lower_of_m(self, m_prime: int) -> int:
        """Least nonscalar size compatible with a data structure of size ``m_prime``."""
        r = isqrt(m_prime)
        ceil_root = r if r * r == m_prime else r + 1
        return max(0, ceil_root - (self.t + self.q))


def complexity_bounds(L: int, t: int, q: int) -> ComplexityBounds:
    """Parameter count ``m = L^2 + (2t-1)L + q(L+t+1)`` of a rearranged circuit."""
    if min(L, t, q) < 0:
        raise ValueError("L, t, q must be non-negative")
    return ComplexityBounds(L, t, q, L * L + (2 * t - 1) * L + q * (L + t + 1))


# generic skeleton

def skeleton_used_slots(L: int, n: int) -> int:
    return L * L + 2 * L * n + 2 * L + n + 1


def generic_skeleton(L: int, n: int) -> Circuit:
    """Universal circuit for nonscalar complexity ``<= L`` in ``n`` variables.

    Stage ``j`` multiplies two affine combinations of ``1, x_1..x_n`` and the
    earlier stage results; the output is an affine combination of all of
    them.  Parameters ``z1..zr`` with ``r = (L+n+1)^2``; unused slots pad the
    parameter list.
    """
    if L < 0 or n < 0:
        raise ValueError("L and n must be non-negative")
    r = (L + n + 1) ** 2
    zs = tuple(f"z{k}" for k in range(1, r + 1))
    xs = tuple(f"x{i}" for i in range(1, n + 1))
    b = CircuitBuilder(zs, xs)
    slot = iter(zs)
    inputs = [b.var(x) for x in xs]

    def affine(terms: List[int]) -> int:
        acc = b.param(next(slot))
        for t in terms:
            acc = b.add(acc, b.mul(b.param(next(slot)), t))
        return acc

    stages: List[int] = []
    for _ in range(L):
        left = affine(inputs + stages)
        right = affine(inputs + stages)
        stages.append(b.mul(left, right))
    b.output(affine(inputs + stages))
    return b.build()


# encoder

def from_polynomial(p, vars: Sequence[str], params: Sequence[str] = ()) -> Circuit:
    """Dense Horner circuit for ``p``; coefficients in ``params`` become scalars."""
    rf = RationalFunction.of(p)
    vars = tuple(vars)
    params = tuple(params)
    used_num = rf.num.used_variables()
    extra = [v for v in used_num if v not in vars and v not in params]
    if extra:
        raise ValueError(f"indeterminate {extra[0]!r} is neither a variable nor a parameter")
    if any(v in vars for v in rf.den.used_variables()):
        raise ValueError("denominator depends on a variable")
    b = CircuitBuilder(params, vars)
    scale = RationalFunction(1, rf.den)
    out = _horner(b, rf.num, list(vars), scale)
    b.output(out)
    return b.build()


def _coefficient_node(b: CircuitBuilder, coeff: Polynomial, scale: RationalFunction) -> Optional[int]:
    value = RationalFunction(coeff) * scale
    if not value:
        return None
    return b.scalar(value)


def _horner(b: CircuitBuilder, p: Polynomial, vars: List[str], scale: RationalFunction) -> int:
    res = _horner_rec(b, p, vars, scale)
    return b.const(0) if res is None else res


def _horner_rec(b, p: Polynomial, vars: List[str], scale) -> Optional[int]:
    live = [v for v in vars if v in p.used_variables()]
    if not live:
        return _coefficient_node(b, p, scale)
    x, rest = live[0], live[1:]
    coeffs = p.coeffs_in(x)
    xnode = b.var(x)
    acc = None  # None stands for zero
    for k in range(len(coeffs) - 1, -1, -1):
        if acc is not None:
            node = b.nodes[acc]
            acc = xnode if node.op == "const" and node.value == 1 else b.mul(acc, xnode)
        cnode = _horner_rec(b, coeffs[k], rest, scale) if coeffs[k] else None
        if cnode is not None:
            acc = cnode if acc is None else b.add(acc, cnode)
    return acc


# serialization

def circuit_to_json(c: Circuit) -> dict:
    nodes = []
    for i, node in enumerate(c.nodes):
        d = {"id": i, "op": node.op}
        if node.name is not None:
            d["name"] = node.name
        if node.op == "const":
            d["value"] = format_rational(node.value)
        elif node.op == "scalar":
            d["value"] = str(node.value)
        if node.args:
            d["args"] = list(node.args)
        nodes.append(d)
    outputs = []
    for i, mark in c.outputs:
        o = {"node": i}
        if mark is not None:
            o["mark"] = mark
        outputs.append(o)
    return {"params": list(c.params), "vars": list(c.vars), "nodes": nodes, "outputs": outputs}


def circuit_from_json(doc: dict) -> Circuit:
    try:
        return _circuit_from_json(doc)
    except (KeyError, TypeError, AttributeError) as exc:
        raise CircuitError(f"malformed circuit document: {exc!r}") from None


def _circuit_from_json(doc: dict) -> Circuit:
    nodes = []
    for k, d in enumerate(doc["nodes"]):
        if d.get("id", k) != k:
            raise CircuitError(f"node ids must be 0..len-1 in order; found {d.get('id')} at {k}")
        op = d["op"]
        if op not in OPS:
            raise CircuitError(f"unknown op {op!r}")
        value = None
        if op == "const":
            value = parse_rational(str(d["value"]))
        elif op == "scalar":
            value = RationalFunction.parse(str(d["value"]))
        nodes.append(Node(op, tuple(d.get("args", ())), d.get("name"), value))
    outputs = [(o["node"], o.get("mark")) for o in doc.get("outputs", [])]
    c = Circuit(tuple(doc.get("params", ())), tuple(doc.get("vars", ())), tuple(nodes), tuple(outputs))
    v = validate(c)
    if not v.ok:
        raise CircuitError(v.diagnostic)
    return c


def dumps(c: Circuit) -> str:
    return json.dumps(circuit_to_json(c), indent=2, sort_keys=False) + "\n"


def loads(text: str) -> Circuit:
    return circuit_from_json(json.loads(text))
