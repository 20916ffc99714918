"""Sample points, extended sample points and the scalar lower-bound laboratory.

The lower-bound family is ``g_n = t * prod_i (l_i + x_i)``.  Its coefficient
of ``x^e`` is ``t * prod_i l_i^(1 - e_i)``; at ``t = tau, l_i = rho^(2^(i-1))``
this is ``tau * rho^j`` with ``j`` the binary number of the complement of
``e``.  Differentiating in ``tau`` at ``0`` therefore gives the rows of the
Vandermonde matrix at ``rho = 1..2^n``.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import os
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .circuit import (
    Circuit, CircuitBuilder, InadmissiblePoint, eval_in_ring, expand_to_polynomials,
    from_polynomial, generic_skeleton, specialize_params, validate,
)
from .elimstack import SizeLimitExceeded, eliminate_charpoly, mult_matrices_cube
from .exactalg.matrix import vandermonde_det, vandermonde_matrix
from .exactalg.polynomial import Polynomial
from .exactalg.ratfunc import RationalFunction
from .exactalg.rational import format_rational, qnorm
from .exactalg.rings import GaussianRational
from .fileio import write_atomic
from .formula.ast import (
    ORDER_RELOPS, And, Atom, Exists, Formula, Not, Or, Truth, conj, is_quantifier_free,
)
from .formula.logic import eval_qf, free_symbols
from .formula.terms import PARAM, VAR, Sym, poly_to_term, term_to_poly
from .verdict import Fail, Pass

CERT_MAX_N = 5
FAMILY_MAX_N = 12


# families

@dataclass(frozen=True)
class RatFamily:
    params: Tuple[str, ...]
    vars: Tuple[str, ...]
    circuit: Circuit
    omega: Formula = Truth(True)

    @property
    def m(self) -> int:
        return len(self.params)

    @property
    def n(self) -> int:
        return len(self.vars)

    def point(self, u) -> Dict[str, object]:
        if isinstance(u, Mapping):
            return {p: qnorm(u[p]) for p in self.params}
        u = tuple(u)
        if len(u) != self.m:
            raise ValueError(f"parameter point has {len(u)} coordinates, family has {self.m}")
        return {p: qnorm(c) for p, c in zip(self.params, u)}


def gn_params(n: int) -> Tuple[str, ...]:
    return ("t",) + tuple(f"l{i}" for i in range(1, n + 1))


def gn_family(n: int, max_n: int = FAMILY_MAX_N) -> RatFamily:
    """``t * (l1 + x1) * ... * (ln + xn)`` with ``n`` multiplications and ``n`` additions."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > max_n:
        raise SizeLimitExceeded(f"n={n} exceeds the configured limit {max_n}")
    params = gn_params(n)
    xs = tuple(f"x{i}" for i in range(1, n + 1))
    b = CircuitBuilder(params, xs)
    acc = None
    for i in range(1, n + 1):
        factor = b.add(b.param(f"l{i}"), b.var(f"x{i}"))
        acc = factor if acc is None else b.mul(acc, factor)
    b.output(b.mul(b.param("t"), acc))
    return RatFamily(params, xs, b.build())


def family_polynomial(fam: RatFamily) -> Polynomial:
    """Member polynomial over ``QQ[params, vars]``; requires polynomial scalars."""
    (rf,) = expand_to_polynomials(fam.circuit)
    if not rf.is_polynomial():
        raise ValueError("family has non-polynomial coefficients")
    return rf.as_polynomial()


def extended_sample_specialize(fam: RatFamily, u) -> Circuit:
    """Division-free circuit computing ``f_u`` over the variables only."""
    point = fam.point(u)
    if is_quantifier_free(fam.omega) and not _omega_holds(fam.omega, point):
        raise InadmissiblePoint(f"parameter point {tuple(point.values())} is outside the domain")
    return specialize_params(fam.circuit, point)


def _omega_holds(omega: Formula, point: Mapping[str, object]) -> bool:
    fs = free_symbols(omega)
    if fs.variables - set(point):
        return True
    return eval_qf(omega, point)


def coefficient_map(fam: RatFamily, gammas: Sequence[Sequence]) -> Callable:
    """``u -> (f_u(gamma_1), ..., f_u(gamma_m))``."""
    gammas = [tuple(qnorm(c) for c in g) for g in gammas]
    for g in gammas:
        if len(g) != fam.n:
            raise ValueError("evaluation points must lie in QQ^n")

    def mu(u) -> Tuple:
        c = extended_sample_specialize(fam, u)
        return tuple(eval_in_ring(c, {}, dict(zip(fam.vars, g)))[0] for g in gammas)

    return mu


# branching-free representations

@dataclass(frozen=True)
class BranchingFreeRep:
    circuit: Circuit

    @property
    def scalars(self) -> Tuple[RationalFunction, ...]:
        """Distinct non-constant parameter-dependent leaves."""
        seen = {}
        for node in self.circuit.nodes:
            if node.op == "param":
                seen.setdefault(RationalFunction(Polynomial.var(node.name)), None)
            elif node.op == "scalar" and not node.value.is_constant():
                seen.setdefault(node.value, None)
        out: List[RationalFunction] = []
        for v in seen:
            if v not in out:
                out.append(v)
        return tuple(out)

    @property
    def s(self) -> int:
        return len(self.scalars)


def dense_rep(fam: RatFamily) -> BranchingFreeRep:
    """Scalars are the coefficient functions of ``f_u`` in the monomial basis."""
    (rf,) = expand_to_polynomials(fam.circuit)
    return BranchingFreeRep(from_polynomial(rf, fam.vars, fam.params))


def _random_rational(rng: random.Random, span: int = 9) -> object:
    return qnorm(Fraction(rng.randint(-span, span), rng.choice((1, 1, 2, 3))))


def check_branching_free_rep(rep: BranchingFreeRep, fam: RatFamily, samples: int = 50, seed: int = 0):
    """Exact agreement of ``rep`` and ``fam`` at sampled admissible ``(u, x)``."""
    if validate(rep.circuit).kind == "invalid":
        return Fail(None, validate(rep.circuit).diagnostic)
    if set(rep.circuit.params) - set(fam.params) or set(rep.circuit.vars) - set(fam.vars):
        return Fail(None, "representation uses symbols outside the family")
    rng = random.Random(seed)
    done = attempts = 0
    while done < samples and attempts < 20 * samples:
        attempts += 1
        u = {p: _random_rational(rng) for p in fam.params}
        x = {v: _random_rational(rng) for v in fam.vars}
        try:
            want = eval_in_ring(fam.circuit, u, x)
            got = eval_in_ring(rep.circuit, {p: u[p] for p in rep.circuit.params}, x)
        except InadmissiblePoint:
            continue
        done += 1
        if want != got:
            return Fail((u, x), {"family": want, "rep": got})
    return Pass(done)


# identification sequences

@dataclass
class IdentificationReport:
    L: int
    n: int
    m: int
    points: List[Tuple[int, ...]]
    pairs_tested: int = 0
    equal_pairs: int = 0
    collisions: List[Tuple] = field(default_factory=list)


def identification_points(L: int, n: int, seed: int = 0) -> List[Tuple[int, ...]]:
    m = 4 * (L + n) ** 2 + 2
    rng = random.Random(seed)
    bound = max(10, 4 * m)
    pts: List[Tuple[int, ...]] = []
    seen = set()
    while len(pts) < m:
        p = tuple(rng.randint(-bound, bound) for _ in range(n))
        if p not in seen:
            seen.add(p)
            pts.append(p)
    return pts


def identification_sequence(L: int, n: int, seed: int = 0, pairs: int = 500,
                            zspan: int = 3) -> IdentificationReport:
    """``m = 4(L+n)^2 + 2`` points with a sampled injectivity report.

    Random integer specializations of the generic skeleton are compared in
    pairs; distinct polynomials with identical evaluation vectors are
    recorded as collisions.
    """
    pts = identification_points(L, n, seed)
    report = IdentificationReport(L, n, len(pts), pts)
    skel = generic_skeleton(L, n)
    rng = random.Random(f"{seed}:pairs")
    for _ in range(pairs):
        z1 = tuple(rng.randint(-zspan, zspan) for _ in skel.params)
        z2 = tuple(rng.randint(-zspan, zspan) for _ in skel.params)
        c1, c2 = specialize_params(skel, z1), specialize_params(skel, z2)
        p1 = expand_to_polynomials(c1)[0]
        p2 = expand_to_polynomials(c2)[0]
        v1 = tuple(eval_in_ring(c1, {}, dict(zip(skel.vars, g)))[0] for g in pts)
        v2 = tuple(eval_in_ring(c2, {}, dict(zip(skel.vars, g)))[0] for g in pts)
        report.pairs_tested += 1
        if p1 == p2:
            report.equal_pairs += 1
            if v1 != v2:
                raise AssertionError("equal polynomials with different evaluation vectors")
        elif v1 == v2:
            report.collisions.append((z1, z2))
    return report


def identification_formula(L: int, n: int, points: Optional[Sequence[Sequence]] = None,
                           seed: int = 0) -> Formula:
    """``exists z: D(z, gamma_k) = w_k for all k`` over the identification points.

    ``D`` is the generic skeleton; ``w1..wm`` are free parameters.  The
    formula is generated for inspection and is not evaluated as a query.
    """
    pts = [tuple(p) for p in points] if points is not None else identification_points(L, n, seed)
    skel = generic_skeleton(L, n)
    (D,) = expand_to_polynomials(skel)
    D = D.as_polynomial()
    kinds = {z: VAR for z in skel.params}
    atoms = []
    for k, g in enumerate(pts, start=1):
        Dk = D.subs(dict(zip(skel.vars, g)))
        atoms.append(Atom(poly_to_term(Dk, kinds), "=", Sym(f"w{k}", PARAM)))
    body = conj(*atoms)
    used = set(D.used_variables())
    for z in reversed(skel.params):
        if z in used:
            body = Exists(z, body)
    return body


# lower-bound certificate

@dataclass(frozen=True)
class ScalarBoundCertificate:
    n: int
    vandermonde_points: Tuple[int, ...]
    det_value: object
    certified_bound: int
    achieved: int
    symbolic_check: Optional[bool] = None

    def to_json(self) -> dict:
        return {"n": self.n, "vandermonde_points": list(self.vandermonde_points),
                "det_value": format_rational(self.det_value),
                "certified_bound": self.certified_bound, "achieved": self.achieved,
                "symbolic_check": self.symbolic_check}


def _complement_index(exps: Sequence[int]) -> int:
    return sum((1 - e) << i for i, e in enumerate(exps))


def derivative_rows(n: int) -> List[List]:
    """Rows ``d/dtau`` at ``tau = 0`` of the coefficient vector of ``g_n`` at ``lambda_rho``.

    Computed symbolically: ``l_i`` is replaced by ``rho^(2^(i-1))`` and each
    ``x``-coefficient is differentiated in ``t``.
    """
    fam = gn_family(n)
    g = family_polynomial(fam)
    N = 1 << n
    rows = []
    for rho in range(1, N + 1):
        lam = {f"l{i}": rho ** (1 << (i - 1)) for i in range(1, n + 1)}
        h = g.subs(lam)
        row = [None] * N
        for exps in itertools.product((0, 1), repeat=n):
            mono = dict(zip(fam.vars, exps))
            c = _coefficient_in(h, mono, fam.vars)
            j = _complement_index(exps)
            row[j] = c.diff("t").subs({"t": 0}).constant_value() if "t" in c.indeterminates else 0
            if c != Polynomial.var("t") * rho ** j:
                raise ArithmeticError(f"coefficient of x^{exps} at rho={rho} is {c}, not t*{rho}^{j}")
        rows.append(row)
    return rows


def _coefficient_in(h: Polynomial, mono: Mapping[str, int], vars: Sequence[str]) -> Polynomial:
    """Coefficient of the ``vars``-monomial ``mono`` as a polynomial in the rest."""
    rest = tuple(v for v in h.indeterminates if v not in vars)
    terms = {}
    for e, c in h.terms.items():
        d = dict(zip(h.indeterminates, e))
        if all(d.get(v, 0) == mono.get(v, 0) for v in vars):
            terms[tuple(d[v] for v in rest)] = c
    return Polynomial(terms, rest)


def vandermonde_certificate(n: int, max_n: int = CERT_MAX_N, symbolic_max_n: int = 3) -> ScalarBoundCertificate:
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > max_n:
        raise SizeLimitExceeded(f"certificate for n={n} exceeds the limit {max_n}")
    N = 1 << n
    pts = tuple(range(1, N + 1))
    value = vandermonde_det(pts)
    if value == 0:
        raise ArithmeticError("Vandermonde determinant vanished")
    symbolic = None
    if n <= symbolic_max_n:
        symbolic = derivative_rows(n) == vandermonde_matrix(pts).tolist()
    achieved = dense_rep(gn_family(n)).s
    return ScalarBoundCertificate(n, pts, value, N, achieved, symbolic)


# sample points

@dataclass(frozen=True)
class SamplePoint:
    point: Dict[str, object]
    exhaustive: bool = False


@dataclass(frozen=True)
class NotFoundWithinBudget:
    searched: int
    exhaustive: bool = False


def _height_values(h: int) -> List:
    """Reduced rationals ``p/q`` with ``max(|p|, q) = h``, small magnitude first."""
    if h == 0:
        return [0]
    out = set()
    for q in range(1, h + 1):
        for p in range(-h, h + 1):
            if max(abs(p), q) == h and Fraction(p, q).denominator == q:
                out.add(Fraction(p, q))
    return [qnorm(v) for v in sorted(out, key=lambda v: (abs(v), v < 0, v.denominator))]


def _values_up_to(h: int, complex_mode: bool) -> List:
    vals = [v for k in range(h + 1) for v in _height_values(k)]
    if not complex_mode:
        return vals
    return [v if im == 0 else GaussianRational(v, im) for v in vals for im in vals]


def _enumerate(n: int, complex_mode: bool) -> Iterator[Tuple]:
    """All rational (or Gaussian rational) ``n``-tuples, by increasing height."""
    if n == 0:
        yield ()
        return
    prev: List = []
    h = 0
    while True:
        cur = _values_up_to(h, complex_mode)
        fresh = set(cur) - set(prev)
        for tup in itertools.product(cur, repeat=n):
            if any(v in fresh for v in tup):
                yield tup
        prev = cur
        h += 1


def _cube_vars(f: Formula, vars: Sequence[str]) -> List[str]:
    """Variables constrained by a top-level ``x^2 - x = 0`` conjunct."""
    parts = f.args if isinstance(f, And) else (f,)
    out = []
    for a in parts:
        if isinstance(a, Atom) and a.op == "=":
            try:
                p = term_to_poly(a.lhs) - term_to_poly(a.rhs)
            except TypeError:
                continue
            for v in vars:
                x = Polynomial.var(v)
                if p == x * x - x or p == x - x * x:
                    out.append(v)
    return [v for v in vars if v in out]


def _check_formula(f: Formula, mode: str):
    if not is_quantifier_free(f):
        raise ValueError("sample_point needs a quantifier-free formula")
    fs = free_symbols(f)
    if fs.relations or fs.functions:
        raise ValueError("sample_point needs a schema-free formula")
    if mode == "complex" and _has_order(f):
        raise ValueError("order relations in complex mode")


def _has_order(f: Formula) -> bool:
    if isinstance(f, Atom):
        return f.op in ORDER_RELOPS
    if isinstance(f, Not):
        return _has_order(f.arg)
    if isinstance(f, (And, Or)):
        return any(_has_order(a) for a in f.args)
    return False


def sample_point(f: Formula, vars: Sequence[str], budget: int = 20000, seed: int = 0,
                 mode: str = "real"):
    """A certified point of ``f`` or :class:`NotFoundWithinBudget`.

    Cube-constrained variables range over ``{0, 1}``; when every variable is
    constrained the search is the full cube and its outcome is exact.  Other
    variables follow a height enumeration; the last quarter of the budget
    tries seeded random rationals of larger height.
    """
    _check_formula(f, mode)
    vars = tuple(vars)
    cube = _cube_vars(f, vars)
    free = [v for v in vars if v not in cube]
    if not free:
        count = 0
        for eps in itertools.product((0, 1), repeat=len(cube)):
            count += 1
            pt = dict(zip(cube, eps))
            if eval_qf(f, pt):
                return SamplePoint(pt, exhaustive=True)
        return NotFoundWithinBudget(count, exhaustive=True)
    complex_mode = mode == "complex"
    det_budget = budget - budget // 4
    count = 0
    corners = list(itertools.product((0, 1), repeat=len(cube)))
    for tup in _enumerate(len(free), complex_mode):
        for eps in corners:
            if count >= det_budget:
                break
            count += 1
            pt = dict(zip(cube, eps))
            pt.update(zip(free, tup))
            if eval_qf(f, pt):
                return SamplePoint(pt)
        if count >= det_budget:
            break
    rng = random.Random(seed)
    while count < budget:
        count += 1
        pt = dict(zip(cube, rng.choice(corners)))
        for v in free:
            val = qnorm(Fraction(rng.randint(-1000, 1000), rng.randint(1, 100)))
            if complex_mode and rng.random() < 0.5:
                val = GaussianRational(val, qnorm(Fraction(rng.randint(-1000, 1000), rng.randint(1, 100))))
            pt[v] = val
        if eval_qf(f, pt):
            return SamplePoint(pt)
    return NotFoundWithinBudget(count)


# growth experiment

CSV_HEADER = ("n", "achieved_scalars", "certified_bound", "vandermonde_det_nonzero",
              "charpoly_terms", "charpoly_ms")


def growth_input(n: int, seed: int = 0) -> Polynomial:
    """Fixed-shape elimination input ``u1 * sum c_i x_i`` with seeded ``c_i`` in 1..9."""
    rng = random.Random(f"{seed}:{n}")
    g = Polynomial.zero()
    for i in range(1, n + 1):
        g = g + Polynomial.var(f"x{i}") * rng.randint(1, 9)
    return g * Polynomial.var("u1")


@dataclass
class ExperimentRow:
    n: int
    achieved_scalars: int
    certified_bound: int
    vandermonde_det_nonzero: object
    charpoly_terms: int
    charpoly_ms: float
    certificate: Optional[ScalarBoundCertificate] = None

    def csv_cells(self) -> List[str]:
        nz = self.vandermonde_det_nonzero
        return [str(self.n), str(self.achieved_scalars), str(self.certified_bound),
                "true" if nz is True else ("false" if nz is False else str(nz)),
                str(self.charpoly_terms), f"{self.charpoly_ms:.3f}"]


def time_charpoly(n: int, seed: int = 0, repeats: int = 3) -> Tuple[int, float]:
    """Term count and best-of-``repeats`` wall time (ms) of cube charpoly elimination."""
    g = growth_input(n, seed)
    M = mult_matrices_cube(n)
    best = None
    terms = 0
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = eliminate_charpoly(g, M, emit_circuit=False)
        dt = (time.perf_counter() - t0) * 1000.0
        terms = res.term_count
        best = dt if best is None else min(best, dt)
    return terms, best


def lowerbound_experiment(n_min: int = 1, n_max: int = 5, seed: int = 0, cert_max_n: int = CERT_MAX_N,
                          charpoly_max_n: int = 9, repeats: int = 3) -> List[ExperimentRow]:
    rows = []
    for n in range(n_min, n_max + 1):
        achieved = dense_rep(gn_family(n)).s
        cert = None
        if n <= cert_max_n:
            cert = vandermonde_certificate(n, cert_max_n)
            bound, nonzero = cert.certified_bound, cert.det_value != 0
        else:
            bound, nonzero = 1 << n, "closed-form"
        if n <= charpoly_max_n:
            terms, ms = time_charpoly(n, seed, repeats)
        else:
            terms, ms = 0, float("nan")
        rows.append(ExperimentRow(n, achieved, bound, nonzero, terms, ms, cert))
    return rows


def report_csv(rows: Sequence[ExperimentRow], timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        cells = r.csv_cells()
        if not timing:
            cells[-1] = ""
        w.writerow(cells)
    return buf.getvalue()


def write_report(rows: Sequence[ExperimentRow], csv_path: str, timing: bool = True) -> List[str]:
    """CSV report plus one ``certificate_n<k>.json`` per certified row, next to it."""
    written = []
    directory = os.path.dirname(os.path.abspath(csv_path))
    write_atomic(csv_path, report_csv(rows, timing))
    written.append(csv_path)
    for r in rows:
        if r.certificate is not None:
            path = os.path.join(directory, f"certificate_n{r.n}.json")
            write_atomic(path, json.dumps(r.certificate.to_json(), indent=2) + "\n")
            written.append(path)
    return written
