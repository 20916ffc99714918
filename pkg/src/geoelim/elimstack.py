"""Elimination through multiplication matrices.

For the cube system ``x_i^2 = x_i`` the quotient algebra has the square-free
monomials ``x^e`` (``e`` in ``{0,1}^n``) as basis, indexed by
``b = sum e_i 2^(i-1)`` with ``x1`` the least significant bit.  Multiplying
by ``x_i`` sends basis element ``b`` to ``b | 2^(i-1)``, so ``M_{x_i}`` has a
single 1 in every column, at row ``b | 2^(i-1)``.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .circuit import Circuit, CircuitMetrics, circuit_to_json, from_polynomial, metrics
from .constraintdb import Instance
from .exactalg.matrix import Matrix, NonSquare, charpoly_coeffs, det, rank_exact
from .exactalg.polynomial import Polynomial
from .exactalg.ratfunc import RationalFunction
from .exactalg.rational import is_rational, qnorm
from .exactalg.rings import (
    QQ, MatrixRing, PolynomialRing, RationalFunctionField, poly_eval_generic,
)
from .exactalg.roots import rational_roots
from .fileio import write_atomic
from .verdict import Fail, Pass

DEFAULT_MAX_N = 12


class SizeLimitExceeded(ValueError):
    pass


class DuplicatePoints(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NotMonic(ValueError):
    pass


class NotHomogeneous(ValueError):
    pass


class DegreeMismatch(ValueError):
    pass


class NotPolynomial(ValueError):
    """A rational-function family produced a non-polynomial elimination output."""


# multiplication matrices

class MultMatrices:
    """Commuting multiplication matrices ``M_{x_1}..M_{x_n}`` of a zero-dimensional algebra.

    Cube matrices are kept as column maps and only materialized on request,
    so structural checks work far beyond the sizes where expansion is
    feasible.
    """

    def __init__(self, n: int, N: int, basis_tag: str, var_names: Sequence[str],
                 matrices: Optional[Sequence[Matrix]] = None,
                 column_maps: Optional[Sequence[Tuple[int, ...]]] = None):
        self.n = n
        self.N = N
        self.basis_tag = basis_tag
        self.var_names = tuple(var_names)
        self._matrices = tuple(matrices) if matrices is not None else None
        self.column_maps = tuple(column_maps) if column_maps is not None else None

    @property
    def matrices(self) -> Tuple[Matrix, ...]:
        if self._matrices is None:
            mats = []
            for cmap in self.column_maps:
                entries = [0] * (self.N * self.N)
                for b, r in enumerate(cmap):
                    entries[r * self.N + b] = 1
                mats.append(Matrix(self.N, self.N, entries, 0))
            self._matrices = tuple(mats)
        return self._matrices

    def assignment(self) -> Dict[str, Matrix]:
        return dict(zip(self.var_names, self.matrices))

    def check_structure(self) -> bool:
        """Idempotence and pairwise commutation (index maps for the cube)."""
        if self.column_maps is not None:
            for f in self.column_maps:
                if any(f[f[b]] != f[b] for b in range(self.N)):
                    return False
            for f, g in itertools.combinations(self.column_maps, 2):
                if any(f[g[b]] != g[f[b]] for b in range(self.N)):
                    return False
            return True
        for A, B in itertools.combinations(self.matrices, 2):
            if A.matmul(B) != B.matmul(A):
                return False
        return True


def _cube_vars(n: int) -> Tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, n + 1))


def mult_matrices_cube(n: int, max_n: int = DEFAULT_MAX_N, var_names: Optional[Sequence[str]] = None) -> MultMatrices:
    if n < 0:
        raise ValueError("n must be non-negative")
    if n > max_n:
        raise SizeLimitExceeded(f"n={n} exceeds the configured limit {max_n}")
    N = 1 << n
    maps = [tuple(b | (1 << i) for b in range(N)) for i in range(n)]
    names = tuple(var_names) if var_names is not None else _cube_vars(n)
    if len(names) != n:
        raise ValueError("need one variable name per cube coordinate")
    return MultMatrices(n, N, "cube-monomial", names, column_maps=maps)


def _as_entry(v):
    if is_rational(v):
        return qnorm(v)
    if isinstance(v, RationalFunction):
        return v.as_polynomial() if v.is_polynomial() else v
    if isinstance(v, Polynomial):
        return v
    raise TypeError(f"unsupported point coordinate {v!r}")


def _sample_param_values(params: Sequence[str], rng: random.Random) -> Dict[str, object]:
    return {u: qnorm(Fraction(rng.randint(-10 ** 6, 10 ** 6), rng.randint(1, 997))) for u in params}


def _eval_entry(v, point):
    if isinstance(v, (Polynomial, RationalFunction)):
        return v.evaluate({u: point[u] for u in v.used_variables()})
    return v


def mult_matrices_points(points: Sequence[Sequence], var_names: Optional[Sequence[str]] = None,
                         samples: int = 5, seed: int = 0) -> MultMatrices:
    """Diagonal multiplication matrices of an explicit (possibly parametric) point set."""
    pts = [tuple(_as_entry(c) for c in p) for p in points]
    if not pts:
        raise ValueError("empty point set")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise ValueError("points of different dimensions")
    names = tuple(var_names) if var_names is not None else _cube_vars(n)
    for a, b in itertools.combinations(range(len(pts)), 2):
        if all(_entries_equal(x, y) for x, y in zip(pts[a], pts[b])):
            raise DuplicatePoints(f"points {a} and {b} coincide", (pts[a],))
    params = sorted({u for p in pts for c in p if not is_rational(c) for u in c.used_variables()})
    if params:
        rng = random.Random(seed)
        for _ in range(samples):
            point = _sample_param_values(params, rng)
            try:
                vals = [tuple(_eval_entry(c, point) for c in p) for p in pts]
            except ZeroDivisionError:
                continue
            if len(set(vals)) != len(vals):
                raise DuplicatePoints("points collide at a sampled parameter value", point)
    mats = []
    for i in range(n):
        zero = 0
        mats.append(Matrix.diag([p[i] for p in pts], zero))
    return MultMatrices(n, len(pts), "point-diagonal", names, matrices=mats)


def _entries_equal(x, y) -> bool:
    if is_rational(x) and is_rational(y):
        return x == y
    return RationalFunction.of(x) == RationalFunction.of(y)


# elimination

@dataclass
class EliminationResult:
    kind: str
    polynomial: Polynomial
    params: Tuple[str, ...]
    yvar: Optional[str] = None
    circuit: Optional[Circuit] = None
    metrics: Optional[CircuitMetrics] = None
    term_count: int = 0

    def sidecar(self) -> dict:
        return {"kind": self.kind, "term_count": self.term_count,
                "metrics": self.metrics.as_dict() if self.metrics else None,
                "poly": str(self.polynomial)}


def _finish(kind: str, poly: Polynomial, params: Sequence[str], yvar: Optional[str],
            emit_circuit: bool) -> EliminationResult:
    params = tuple(params)
    vars = (yvar,) if yvar is not None else ()
    poly = poly.with_indeterminates(vars + params)
    res = EliminationResult(kind, poly, params, yvar, term_count=len(poly.terms))
    if emit_circuit:
        res.circuit = from_polynomial(poly, vars, params)
        res.metrics = metrics(res.circuit)
    return res


def _params_of(g: Polynomial, M: MultMatrices, yvar: Optional[str] = None) -> Tuple[str, ...]:
    entry_params = set()
    if M.basis_tag == "point-diagonal":
        for A in M.matrices:
            for e in A.diagonal():
                if not is_rational(e):
                    entry_params.update(e.used_variables())
    params = [v for v in g.used_variables() if v not in M.var_names] + sorted(entry_params)
    out = tuple(dict.fromkeys(params))
    if yvar is not None and yvar in out:
        raise ValueError(f"output variable {yvar!r} already occurs in the input")
    return out


def evaluate_at_matrices(g: Polynomial, M: MultMatrices) -> Matrix:
    """``g(u, M_{x_1}, ..., M_{x_n})`` in the matrix ring over the parameter ring."""
    unknown = [v for v in g.used_variables() if v not in M.var_names]
    params = _params_of(g, M)
    rational_entries = all(is_rational(e) for A in M.matrices for e in A.entries)
    if rational_entries:
        base = PolynomialRing(params) if params else QQ
    elif all(not isinstance(e, RationalFunction) for A in M.matrices for e in A.entries):
        base = PolynomialRing(params)
    else:
        base = RationalFunctionField()
    ring = MatrixRing(M.N, base)
    assign: Dict[str, object] = dict(M.assignment())
    rf_base = isinstance(base, RationalFunctionField)
    for u in unknown:
        assign[u] = ring.embed(RationalFunction(Polynomial.var(u)) if rf_base else Polynomial.var(u))
    return poly_eval_generic(g, assign, ring)


def _poly_entry(c) -> Polynomial:
    if isinstance(c, Polynomial):
        return c
    if isinstance(c, RationalFunction):
        if not c.is_polynomial():
            raise NotPolynomial(f"elimination coefficient {c} is not a polynomial")
        return c.as_polynomial()
    return Polynomial.const(c)


def eliminate_det(g: Polynomial, M: MultMatrices, method: str = "auto",
                  emit_circuit: bool = True) -> EliminationResult:
    """``Delta(u) = det g(u, M)``; it vanishes exactly where ``g`` has a root on the variety."""
    A = evaluate_at_matrices(g, M)
    value = _poly_entry(det(A, method))
    return _finish("det", value, _params_of(g, M), None, emit_circuit)


def eliminate_charpoly(g: Polynomial, M: MultMatrices, yvar: str = "y", method: str = "auto",
                       emit_circuit: bool = True) -> EliminationResult:
    """``P(y, u) = det(y I - g(u, M))``, monic of degree ``N`` in ``y``."""
    params = _params_of(g, M, yvar)
    A = evaluate_at_matrices(g, M)
    coeffs = charpoly_coeffs(A, method)
    N = len(coeffs) - 1
    terms: Dict[tuple, object] = {}
    names = (yvar,) + params
    for i, c in enumerate(coeffs):
        if not c:
            continue
        c = _poly_entry(c).with_indeterminates(params)
        for e, a in c.terms.items():
            terms[(N - i,) + e] = a
    poly = Polynomial(terms, names)
    return _finish("charpoly", poly, params, yvar, emit_circuit)


def oracle_elimination_poly(g: Polynomial, domain, yvar: str = "y",
                            var_names: Optional[Sequence[str]] = None) -> Polynomial:
    """Brute-force ``prod_{p in domain} (y - g(u, p))``.

    ``domain`` is an integer ``n`` (the cube ``{0,1}^n``) or an explicit
    sequence of points.
    """
    if isinstance(domain, int):
        pts = list(itertools.product((0, 1), repeat=domain))
        n = domain
    else:
        pts = [tuple(p) for p in domain]
        n = len(pts[0]) if pts else 0
    names = tuple(var_names) if var_names is not None else _cube_vars(n)
    y = Polynomial.var(yvar)
    out = Polynomial.const(1)
    for p in pts:
        val = g.subs(dict(zip(names, p)))
        out = out * (y - val)
    params = tuple(v for v in out.used_variables() if v != yvar)
    return out.with_indeterminates((yvar,) + tuple(sorted(params, key=_natural_key)))


def oracle_result(g: Polynomial, domain, yvar: str = "y", emit_circuit: bool = True,
                  var_names: Optional[Sequence[str]] = None) -> EliminationResult:
    poly = oracle_elimination_poly(g, domain, yvar, var_names)
    params = tuple(v for v in poly.indeterminates if v != yvar)
    return _finish("oracle", poly, params, yvar, emit_circuit)


def _natural_key(name: str):
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return (head, int(tail) if tail else -1)


# partial evaluation

@dataclass(frozen=True)
class PartialEvalDecomposition:
    omegas: Tuple[Polynomial, ...]
    skeleton: Polynomial
    ell: int
    yvar: str
    tvars: Tuple[str, ...]

    @property
    def scalar_count(self) -> int:
        distinct = {w for w in self.omegas if not w.is_constant()}
        return len(distinct)

    def reconstruct(self) -> Polynomial:
        return self.skeleton.subs(dict(zip(self.tvars, self.omegas)))


def partial_eval_decompose(P: Polynomial, yvar: str = "y", prefix: str = "t") -> PartialEvalDecomposition:
    """Split ``P = y^l + sum omega_j y^(j-1)`` into parameter scalars and a fixed skeleton."""
    if yvar not in P.used_variables():
        if P == 1:
            return PartialEvalDecomposition((), Polynomial.const(1), 0, yvar, ())
        raise NotMonic(f"polynomial is not monic in {yvar!r}")
    coeffs = P.coeffs_in(yvar)
    ell = len(coeffs) - 1
    if coeffs[-1] != 1:
        raise NotMonic(f"leading coefficient in {yvar!r} is {coeffs[-1]}, not 1")
    taken = set(P.used_variables())
    while any(f"{prefix}{j}" in taken for j in range(1, ell + 1)):
        prefix += "_"
    tvars = tuple(f"{prefix}{j}" for j in range(1, ell + 1))
    y = Polynomial.var(yvar)
    q = y ** ell
    for j, t in enumerate(tvars, start=1):
        q = q + Polynomial.var(t) * y ** (j - 1)
    q = q.with_indeterminates((yvar,) + tvars)
    return PartialEvalDecomposition(tuple(coeffs[:-1]), q, ell, yvar, tvars)


# linear-system specification

def _sample_points(params: Sequence[str], targets: Sequence[Polynomial], samples: int,
                   rng: random.Random) -> List[Dict[str, object]]:
    """Half box samples, half points on the zero sets of ``targets`` when reachable.

    A targeted sample fixes all parameters but one at random integers and
    picks a rational root of the resulting univariate restriction.
    """
    out = []
    for k in range(samples):
        point = {u: rng.randint(-3, 3) for u in params}
        if k % 2 == 1 and params and targets:
            t = targets[(k // 2) % len(targets)]
            free = [u for u in params if u in t.used_variables()]
            if free:
                u0 = rng.choice(free)
                rest = {u: v for u, v in point.items() if u != u0}
                restricted = t.subs(rest)
                roots = rational_roots(restricted, u0) if not restricted.is_zero() else [rng.randint(-3, 3)]
                if roots:
                    point[u0] = rng.choice(roots)
        out.append(point)
    return out


def check_spec_dagger(Phi: Matrix, F: Polynomial, samples: int = 50, seed: int = 0):
    """``Phi(u) x = 0`` has a nonzero solution iff ``F(u) = 0``, at sampled rational ``u``.

    Singularity is decided by exact rank, never through a determinant.
    """
    if not Phi.is_square():
        raise NonSquare("the system matrix must be square")
    F = F if isinstance(F, Polynomial) else Polynomial.const(F)
    params = set(F.used_variables())
    entries = [e if isinstance(e, Polynomial) else Polynomial.const(e) for e in Phi.entries]
    for e in entries:
        params.update(e.used_variables())
    params = sorted(params, key=_natural_key)
    rng = random.Random(seed)
    # sampling is steered onto both zero sets; the verdict itself uses ranks only
    targets = [F] + _minor_targets(entries, Phi.rows)
    for point in _sample_points(params, targets, samples, rng):
        A = Matrix(Phi.rows, Phi.cols, [e.evaluate({u: point[u] for u in e.used_variables()}) for e in entries], 0)
        singular = rank_exact(A) < Phi.rows
        vanishes = F.evaluate({u: point[u] for u in F.used_variables()}) == 0
        if singular != vanishes:
            return Fail(dict(point), {"singular": singular, "F_vanishes": vanishes})
    return Pass(samples)


def _minor_targets(entries: List[Polynomial], n: int) -> List[Polynomial]:
    """Steering targets for the singular locus (the symbolic determinant)."""
    M = Matrix(n, n, entries, Polynomial.zero())
    d = det(M, "berkowitz")
    return [_poly_entry(d)] if not _poly_entry(d).is_constant() else []


# resultants

def _binary_form_coeffs(f: Polynomial, d: int, x1: str, x2: str) -> List[Polynomial]:
    """``[a_d, ..., a_0]`` with ``f = sum a_i x1^i x2^(d-i)``."""
    coeffs = [Polynomial.zero() for _ in range(d + 1)]
    if f.is_zero():
        return coeffs
    vars = f.indeterminates
    i1 = vars.index(x1) if x1 in vars else None
    i2 = vars.index(x2) if x2 in vars else None
    rest = tuple(v for v in vars if v not in (x1, x2))
    degs = set()
    buckets: List[Dict[tuple, object]] = [dict() for _ in range(d + 1)]
    for e, c in f.terms.items():
        a = e[i1] if i1 is not None else 0
        b = e[i2] if i2 is not None else 0
        degs.add(a + b)
        if a + b == d:
            key = tuple(k for v, k in zip(vars, e) if v not in (x1, x2))
            buckets[a][key] = c
    if len(degs) > 1:
        raise NotHomogeneous(f"form mixes degrees {sorted(degs)} in ({x1}, {x2})")
    if degs != {d}:
        raise DegreeMismatch(f"form has degree {degs.pop()}, declared {d}")
    return [Polynomial(buckets[i], rest) for i in range(d, -1, -1)]


def sylvester_matrix(a: Sequence, b: Sequence) -> Matrix:
    """Sylvester matrix of coefficient lists given highest degree first."""
    d1, d2 = len(a) - 1, len(b) - 1
    size = d1 + d2
    zero = Polynomial.zero()
    rows = []
    for k in range(d2):
        rows.append([zero] * k + list(a) + [zero] * (size - d1 - 1 - k))
    for k in range(d1):
        rows.append([zero] * k + list(b) + [zero] * (size - d2 - 1 - k))
    return Matrix(size, size, [x for r in rows for x in r], zero)


def form_degree(f: Polynomial, x1: str = "x1", x2: str = "x2") -> int:
    """Degree of ``f`` in ``x1, x2`` jointly; -1 for zero."""
    vars = f.indeterminates
    idx = [vars.index(v) for v in (x1, x2) if v in vars]
    return max((sum(e[i] for i in idx) for e in f.terms), default=-1)


def sylvester_resultant(f: Polynomial, g: Polynomial, d1: Optional[int] = None,
                        d2: Optional[int] = None, x1: str = "x1", x2: str = "x2") -> Polynomial:
    """Resultant of two binary forms of degrees ``d1, d2 >= 1``.

    A missing degree is read off the form, which then must be nonzero.
    """
    if d1 is None:
        d1 = form_degree(f, x1, x2)
    if d2 is None:
        d2 = form_degree(g, x1, x2)
    if d1 < 1 or d2 < 1:
        raise DegreeMismatch("declared degrees must be at least 1")
    a = _binary_form_coeffs(f, d1, x1, x2)
    b = _binary_form_coeffs(g, d2, x1, x2)
    return _poly_entry(det(sylvester_matrix(a, b), "berkowitz"))


def linear_resultant(forms: Sequence[Polynomial], var_names: Sequence[str]) -> Polynomial:
    """Resultant of ``n`` linear forms in ``n`` variables: the coefficient determinant."""
    n = len(var_names)
    if len(forms) != n:
        raise DegreeMismatch(f"need {n} linear forms, got {len(forms)}")
    rows = []
    for f in forms:
        for e, _ in f.terms.items():
            deg = sum(k for v, k in zip(f.indeterminates, e) if v in var_names)
            if deg != 1:
                raise NotHomogeneous("linear resultant needs forms homogeneous of degree 1")
        rows.append([f.diff(v) if v in f.indeterminates else Polynomial.zero() for v in var_names])
    M = Matrix(n, n, [x for r in rows for x in r], Polynomial.zero())
    return _poly_entry(det(M, "berkowitz"))


# sanity checks

def degree_sanity(P: Polynomial, delta: int, degF: int, yvar: str = "y"):
    problems = []
    if yvar not in P.used_variables():
        problems.append(f"{yvar} does not occur")
    else:
        coeffs = P.coeffs_in(yvar)
        if coeffs[-1] != 1:
            problems.append(f"not monic in {yvar}")
        if len(coeffs) - 1 > delta:
            problems.append(f"deg_{yvar} = {len(coeffs) - 1} > {delta}")
    if P.degree() > delta * degF:
        problems.append(f"total degree {P.degree()} > {delta}*{degF}")
    return Fail(tuple(problems)) if problems else Pass(1)


def flat_fiber_check(family: Sequence[Sequence], params: Sequence[str], samples: int = 50, seed: int = 0):
    """Distinctness of the ``N`` fiber points at sampled admissible parameter values.

    Integer box points are tried first, then random rationals.
    """
    pts = [tuple(RationalFunction.of(c) for c in p) for p in family]
    params = tuple(params)
    rng = random.Random(seed)
    box = list(itertools.product(range(-3, 4), repeat=len(params)))
    candidates = box[:samples]
    while len(candidates) < samples:
        candidates.append(tuple(qnorm(Fraction(rng.randint(-50, 50), rng.randint(1, 7))) for _ in params))
    checked = 0
    for c in candidates:
        point = dict(zip(params, c))
        try:
            vals = [tuple(v.evaluate({u: point[u] for u in v.used_variables()}) for v in p) for p in pts]
        except ZeroDivisionError:
            continue
        checked += 1
        if len(set(vals)) != len(vals):
            return Fail(c)
    return Pass(checked)


# queries on database instances

def _function_of(inst: Instance, name: Optional[str]):
    if name is None:
        if len(inst.functions) != 1:
            raise ValueError("instance must have exactly one function unless a name is given")
        name = next(iter(inst.functions))
    return inst.functions[name]


def det_query(M: MultMatrices, fname: Optional[str] = None, out_name: str = "Delta"):
    """Instance map ``F(u, x) -> det F(u, M)`` (a function of the parameters only)."""
    def query(inst: Instance) -> Instance:
        num, den = _function_of(inst, fname)
        g = num.with_indeterminates(tuple(v for v in num.indeterminates if v in M.var_names or v in inst.params))
        delta = eliminate_det(g, M, emit_circuit=False).polynomial
        return Instance(inst.params, (), {}, {out_name: (delta.with_indeterminates(inst.params), den ** M.N)},
                        inst.mode)

    return query


def charpoly_query(M: MultMatrices, fname: Optional[str] = None, yvar: str = "y", out_name: str = "P"):
    """Instance map ``F(u, x) -> det(y I - F(u, M))`` as a function of ``(u, y)``."""
    def query(inst: Instance) -> Instance:
        num, den = _function_of(inst, fname)
        res = eliminate_charpoly(num, M, yvar, emit_circuit=False).polynomial
        if den != 1:
            # det(y I - A/den) = det(y den I - A) / den^N
            res = res.subs({yvar: Polynomial.var(yvar) * den})
        names = (yvar,) + inst.params
        return Instance(inst.params, (yvar,), {}, {out_name: (res.with_indeterminates(names), den ** M.N)},
                        inst.mode)

    return query


def write_result(res: EliminationResult, circuit_path: str, sidecar_path: str) -> Tuple[str, str]:
    circuit_text = json.dumps(circuit_to_json(res.circuit), indent=2) + "\n"
    sidecar_text = json.dumps(res.sidecar(), indent=2) + "\n"
    write_atomic(circuit_path, circuit_text)
    write_atomic(sidecar_path, sidecar_text)
    return circuit_text, sidecar_text
