import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from geoelim.exactalg import (
    QQ, GaussianField, GaussianRational, Matrix, MatrixRing, MissingAssignment,
    NonSquare, Polynomial, PolynomialRing, RationalFunction, RingMismatch, UnknownSymbol,
    charpoly, charpoly_coeffs, coeffs_in, det, det_bareiss, format_rational, parse_rational,
    poly_eval_generic, qnorm, rank_exact, vandermonde_det,
)
from geoelim.exactalg.roots import rational_roots
from geoelim.elimstack import mult_matrices_cube

import oracles

P = Polynomial.parse
NAMES = ("u1", "u2", "x1")


@st.composite
def polys(draw, names=NAMES, max_terms=5):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(0, 3)) for _ in names)
        c = Fraction(draw(st.integers(-20, 20)), draw(st.integers(1, 5)))
        terms[e] = c
    return Polynomial(terms, names)


rationals = st.fractions(min_value=-50, max_value=50, max_denominator=12)


# rationals

def test_rational_normal_form():
    assert qnorm(Fraction(4, 2)) == 2 and isinstance(qnorm(Fraction(4, 2)), int)
    assert parse_rational("-6/4") == Fraction(-3, 2)
    assert format_rational(Fraction(-3, 2)) == "-3/2"
    assert format_rational(Fraction(0, 7)) == "0"
    assert format_rational(5) == "5"


@given(rationals)
def test_rational_roundtrip(q):
    assert parse_rational(format_rational(q)) == q


def test_malformed_rational():
    with pytest.raises(ValueError):
        parse_rational("1/0")
    with pytest.raises(ValueError):
        parse_rational("abc")


# polynomials

def test_polynomial_canonical_form():
    p = Polynomial({(1, 0): 3, (0, 1): 0, (2, 0): Fraction(1, 2)}, ("x", "y"))
    assert p.terms == {(1, 0): 3, (2, 0): Fraction(1, 2)}
    assert [e for e, _ in p.items()] == [(2, 0), (1, 0)]  # graded-lex, highest first
    assert str(p) == "1/2*x^2 + 3*x"
    assert Polynomial.parse(str(p)) == p


def test_leading_minus_rendering_roundtrips():
    for p in [-P("x^2"), -P("x^2*y") + 1, P("y") - P("x^3"), -P("x*y^2")]:
        assert Polynomial.parse(str(p)) == p
    # unary minus binds tighter than ^
    assert P("-x^2") == P("x^2")


def test_equality_across_indeterminate_lists():
    assert P("x + 1").with_indeterminates(("y", "x")) == P("x + 1")
    assert P("x - x") == 0


@given(polys(), polys())
def test_add_sub_inverse(p, q):
    assert p + q - q == p


@given(polys(), polys(), polys())
def test_ring_axioms(p, q, r):
    assert p * (q + r) == p * q + p * r
    assert (p * q) * r == p * (q * r)
    assert p * q == q * p


@given(polys())
def test_parse_render_idempotent(p):
    s = str(p)
    assert str(Polynomial.parse(s)) == str(Polynomial.parse(str(Polynomial.parse(s))))
    assert Polynomial.parse(s) == p


@given(polys(), polys(), st.lists(rationals, min_size=3, max_size=3))
def test_evaluation_is_homomorphism(p, q, vals):
    pt = dict(zip(NAMES, vals))
    assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)
    assert (p - q).evaluate(pt) == p.evaluate(pt) - q.evaluate(pt)


@given(polys(max_terms=3), polys(max_terms=3))
def test_exact_division(p, q):
    if q.is_zero():
        return
    assert (p * q).exact_div(q) == p


def test_polynomial_against_sympy():
    rng = random.Random(3)
    for _ in range(50):
        p = oracles.random_poly(rng, NAMES)
        q = oracles.random_poly(rng, NAMES)
        expr = sympy.expand(oracles.to_sympy(p) * oracles.to_sympy(q) - 3 * oracles.to_sympy(q))
        assert oracles.poly_equal_sympy(p * q - 3 * q, expr)


def test_coeffs_in_examples():
    assert coeffs_in(P("y^2 - (u1+u2)*y + u1*u2"), "y") == [P("u1*u2"), P("-u1-u2"), 1]
    assert coeffs_in(P("u1").with_indeterminates(("y", "u1")), "y") == [P("u1")]
    g2 = P("t*(l1+x1)*(l2+x2)")
    assert coeffs_in(g2, "t") == [0, P("(l1+x1)*(l2+x2)")]
    with pytest.raises(UnknownSymbol):
        coeffs_in(P("u1"), "y")


@given(polys())
def test_coeffs_in_reconstructs(p):
    cs = p.coeffs_in("x1")
    x = Polynomial.var("x1")
    assert sum((c * x ** j for j, c in enumerate(cs)), Polynomial.zero()) == p


def test_missing_assignment():
    with pytest.raises(MissingAssignment):
        P("x1 + u1").evaluate({"x1": 1})


# rational functions

def test_rational_function_normalization():
    r = RationalFunction(P("2*u1^2 - 2"), P("4*u1 - 4"))
    assert r.is_polynomial() and r.as_polynomial() == P("1/2*u1 + 1/2")
    s = RationalFunction(P("u1"), P("-2*u2"))
    assert s.den.leading_coefficient() > 0
    assert s == RationalFunction(P("-u1"), P("2*u2"))
    assert RationalFunction.parse("(u1)/(u2)") * RationalFunction(P("u2")) == RationalFunction(P("u1"))
    with pytest.raises(ZeroDivisionError):
        RationalFunction(P("1"), P("u1")).evaluate({"u1": 0})


@given(polys(max_terms=3), polys(max_terms=3))
def test_rational_function_field_ops(p, q):
    if q.is_zero() or p.is_zero():
        return
    r = RationalFunction(p, q)
    assert r * RationalFunction(q, p) == 1
    assert r + r == RationalFunction(2 * p, q)
    assert hash(r) == hash(RationalFunction(p * 3, q * 3))


# generic rings

def test_poly_eval_generic_examples():
    assert poly_eval_generic(P("x1^2 - x1"), {"x1": 3}, QQ) == 6
    M = mult_matrices_cube(2)
    ring = MatrixRing(4, PolynomialRing(("u1", "u2")))
    assign = dict(M.assignment())
    assign["u1"] = ring.embed(P("u1"))
    assign["u2"] = ring.embed(P("u2"))
    got = poly_eval_generic(P("u1*x1 + u2*x2"), assign, ring)
    A, B = M.matrices
    want = [[a * P("u1") + b * P("u2") for a, b in zip(ra, rb)] for ra, rb in zip(A.tolist(), B.tolist())]
    assert got.tolist() == want
    assert poly_eval_generic(Polynomial.zero(), {}, ring).is_zero()


def test_poly_eval_generic_errors():
    with pytest.raises(MissingAssignment):
        poly_eval_generic(P("x1*x2"), {"x1": 1}, QQ)
    with pytest.raises(RingMismatch):
        poly_eval_generic(P("x1"), {"x1": P("u1")}, QQ)


def test_gaussian_ring():
    i = GaussianRational(0, 1)
    assert poly_eval_generic(P("x^2 + 1"), {"x": i}, GaussianField()) == 0
    assert (i * i) == -1
    assert GaussianRational(1, 2) / GaussianRational(1, 2) == 1


# matrices

def test_charpoly_examples():
    assert charpoly(Matrix.zeros(2, 2)) == P("y^2")
    assert charpoly(Matrix.diag([P("u1"), P("u2")])) == P("(y-u1)*(y-u2)")
    A = mult_matrices_cube(1).matrices[0].map(lambda c: c * P("u1"))
    assert charpoly(A) == P("y*(y-u1)")
    with pytest.raises(NonSquare):
        charpoly(Matrix.zeros(2, 3))


def test_det_examples():
    assert det(Matrix.identity(3)) == 1
    a, b, c, d = (P(s) for s in "abcd")
    assert det(Matrix.from_rows([[a, b], [c, d]])) == P("a*d - b*c")


@st.composite
def rational_matrices(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    return [[draw(st.fractions(min_value=-5, max_value=5, max_denominator=3)) for _ in range(n)] for _ in range(n)]


@given(rational_matrices())
def test_det_matches_charpoly_and_bareiss(rows):
    M = Matrix.from_rows(rows)
    N = M.rows
    c = charpoly_coeffs(M, "berkowitz")
    d = det(M)
    assert d == ((-1) ** N) * c[-1]
    assert d == det_bareiss(M)


@given(rational_matrices(max_n=4))
def test_det_matches_cofactor_oracle(rows):
    assert det(Matrix.from_rows(rows), "berkowitz") == oracles.cofactor_det(rows)


@given(rational_matrices(max_n=5))
def test_charpoly_matches_sympy(rows):
    ours = charpoly(Matrix.from_rows(rows), "y", method="berkowitz")
    y = sympy.Symbol("y")
    theirs = sympy.Matrix(rows).charpoly(y).as_expr()
    assert oracles.poly_equal_sympy(ours, theirs)


def test_symbolic_charpoly_matches_sympy():
    rng = random.Random(5)
    for _ in range(10):
        rows = [[oracles.random_poly(rng, ("u1", "u2"), max_terms=2) for _ in range(3)] for _ in range(3)]
        ours = charpoly(Matrix.from_rows(rows), "y", method="berkowitz")
        sm = sympy.Matrix([[oracles.to_sympy(e) for e in r] for r in rows])
        assert oracles.poly_equal_sympy(ours, sm.charpoly(sympy.Symbol("y")).as_expr())


@given(st.lists(st.fractions(min_value=-9, max_value=9, max_denominator=4), min_size=1, max_size=7))
def test_charpoly_of_diagonal_is_product(vals):
    got = charpoly(Matrix.diag(vals), method="berkowitz")
    want = Polynomial.const(1)
    for v in vals:
        want = want * (Polynomial.var("y") - v)
    assert got == want
    assert charpoly(Matrix.diag(vals)) == want


def test_rank_examples():
    assert rank_exact(Matrix.zeros(2, 3)) == 0
    assert rank_exact(Matrix.identity(4)) == 4
    assert rank_exact(Matrix.from_rows([[1, 2], [2, 4]])) == 1


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_rank_matches_minor_oracle(m, n, data):
    rows = [[data.draw(st.integers(-2, 2)) for _ in range(n)] for _ in range(m)]
    assert rank_exact(Matrix.from_rows(rows)) == oracles.minor_rank(rows)


def test_vandermonde_values():
    assert vandermonde_det([1, 2]) == oracles.VANDERMONDE_1_2
    assert vandermonde_det([1, 2, 3]) == oracles.VANDERMONDE_1_2_3
    assert vandermonde_det(range(1, 5)) == oracles.VANDERMONDE_1_TO_4
    assert vandermonde_det(range(1, 9)) == oracles.VANDERMONDE_1_TO_8


@given(st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=5), min_size=1, max_size=7, unique=True))
def test_vandermonde_nonzero_on_distinct_points(pts):
    v = vandermonde_det(pts)
    closed = Fraction(1)
    for i in range(len(pts)):
        for k in range(i + 1, len(pts)):
            closed *= pts[k] - pts[i]
    assert v == closed and v != 0


def test_rational_roots():
    assert rational_roots(P("(2*x-1)*(x+3)*x^2*(x^2+1)")) == [-3, 0, Fraction(1, 2)]
    assert rational_roots(P("x^2 - 2")) == []
