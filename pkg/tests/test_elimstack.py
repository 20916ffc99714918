import itertools
import random

import pytest
import sympy
from hypothesis import given, strategies as st

from geoelim.circuit import expand_to_polynomials
from geoelim.elimstack import (
    DegreeMismatch, DuplicatePoints, NotHomogeneous, NotMonic, SizeLimitExceeded,
    check_spec_dagger, degree_sanity, eliminate_charpoly, eliminate_det,
    evaluate_at_matrices, flat_fiber_check, linear_resultant, mult_matrices_cube,
    mult_matrices_points, oracle_elimination_poly, oracle_result, partial_eval_decompose,
    sylvester_resultant,
)
from geoelim.exactalg import Matrix, Polynomial, RationalFunction, charpoly, det
from geoelim.formula import cube_points, eval_finite_exists, parse

import oracles

P = Polynomial.parse


def cube_g(rng, n, params=("u1", "u2"), max_deg=2):
    names = params + tuple(f"x{i}" for i in range(1, n + 1))
    return oracles.random_poly(rng, names, max_deg=max_deg, max_terms=4, span=5)


# multiplication matrices

def test_cube_n1_matrix():
    (A,) = mult_matrices_cube(1).matrices
    assert A.tolist() == [[0, 0], [1, 1]]
    assert A.matmul(A) == A
    assert charpoly(A) == P("y*(y - 1)")


def test_cube_matrices_structure_small():
    for n in range(0, 5):
        M = mult_matrices_cube(n)
        assert M.N == 2 ** n and len(M.matrices) == n
        for A in M.matrices:
            assert A.matmul(A) == A
            rows = A.tolist()
            assert all(v in (0, 1) for r in rows for v in r)
            for col in range(M.N):
                assert sum(rows[r][col] for r in range(M.N)) == 1
        for A, B in itertools.combinations(M.matrices, 2):
            assert A.matmul(B) == B.matmul(A)


def test_cube_n2_commutation_explicit():
    A, B = mult_matrices_cube(2).matrices
    assert A.matmul(B).tolist() == B.matmul(A).tolist() == [
        [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [1, 1, 1, 1]]


def test_cube_structure_up_to_12():
    for n in range(0, 13):
        assert mult_matrices_cube(n).check_structure()
    with pytest.raises(SizeLimitExceeded):
        mult_matrices_cube(13)


def test_points_matrices():
    (D,) = mult_matrices_points([(0,), (1,)]).matrices
    assert D.tolist() == [[0, 0], [0, 1]]
    M = mult_matrices_points([(0, 0), (1, 2)])
    assert M.matrices[1].tolist() == [[0, 0], [0, 2]]
    with pytest.raises(DuplicatePoints):
        mult_matrices_points([(1, 2), (1, 2)])
    u = P("u1")
    with pytest.raises(DuplicatePoints):
        mult_matrices_points([(u + u, 1), (2 * u, 1)])
    # a collision only at u1 = 0 is not generic; the family is accepted
    assert mult_matrices_points([(u,), (2 * u,)]).N == 2
    assert mult_matrices_points([(u,), (u + 1,)]).N == 2


def test_cube_and_point_bases_agree():
    rng = random.Random(7)
    for n in range(1, 4):
        Mc = mult_matrices_cube(n)
        Mp = mult_matrices_points(list(cube_points(n)))
        for _ in range(8):
            g = cube_g(rng, n)
            assert eliminate_charpoly(g, Mc, emit_circuit=False).polynomial == \
                eliminate_charpoly(g, Mp, emit_circuit=False).polynomial


# elimination

def test_det_examples():
    assert eliminate_det(P("x1 - 2"), mult_matrices_cube(1)).polynomial == 2
    assert eliminate_det(P("x1 + x2 - 3"), mult_matrices_cube(2)).polynomial == 12
    assert eliminate_det(P("x1"), mult_matrices_cube(1)).polynomial == 0


def test_charpoly_examples():
    assert eliminate_charpoly(P("u1*x1"), mult_matrices_cube(1)).polynomial == P("y*(y - u1)")
    r = eliminate_charpoly(P("u1*x1 + u2*x2"), mult_matrices_cube(2))
    assert r.polynomial == P("y*(y - u1)*(y - u2)*(y - u1 - u2)")
    assert r.kind == "charpoly" and r.term_count == len(r.polynomial.terms)
    assert expand_to_polynomials(r.circuit) == [RationalFunction(r.polynomial)]
    assert eliminate_charpoly(Polynomial.const(3), mult_matrices_cube(2)).polynomial == P("(y - 3)^4")


def test_oracle_examples():
    assert oracle_elimination_poly(P("x1"), 1) == P("y*(y - 1)")
    assert oracle_elimination_poly(P("u1"), 0) == P("y - u1")
    rng = random.Random(9)
    for n in range(0, 4):
        g = cube_g(rng, n)
        p = oracle_elimination_poly(g, n)
        assert p.coeffs_in("y")[-1] == 1 and p.degree("y") == 2 ** n


def test_oracle_matches_sympy():
    rng = random.Random(10)
    for n in range(1, 4):
        for _ in range(5):
            g = cube_g(rng, n)
            assert oracles.poly_equal_sympy(oracle_elimination_poly(g, n), oracles.product_oracle_sympy(str(g), n))


def test_oracle_equivalence_200():
    rng = random.Random(200)
    for trial in range(200):
        n = 1 + trial % 3
        M = mult_matrices_cube(n)
        g = cube_g(rng, n)
        want = oracle_elimination_poly(g, n)
        got = eliminate_charpoly(g, M, emit_circuit=False).polynomial
        assert got == want
        d = eliminate_det(g, M, emit_circuit=False).polynomial
        at0 = want.subs({"y": 0})
        assert d == (-1) ** M.N * at0


def test_det_and_charpoly_methods_agree():
    rng = random.Random(4)
    M = mult_matrices_cube(2)
    for _ in range(10):
        g = cube_g(rng, 2)
        a = eliminate_charpoly(g, M, method="berkowitz", emit_circuit=False).polynomial
        b = eliminate_charpoly(g, M, emit_circuit=False).polynomial
        assert a == b
        assert eliminate_det(g, M, method="bareiss", emit_circuit=False).polynomial == \
            eliminate_det(g, M, method="berkowitz", emit_circuit=False).polynomial


def test_semantic_equivalence():
    rng = random.Random(100)
    cases = [(P("u1*x1 + u2*x2 - u3"), 2), (P("x1*x2 - u1 + u2*x3"), 3), (P("u1*x1^2 - u2"), 1)]
    for g, n in cases:
        M = mult_matrices_cube(n)
        delta = eliminate_det(g, M, emit_circuit=False).polynomial
        xs = [f"x{i}" for i in range(1, n + 1)]
        cube = " and ".join(f"{x}^2 - {x} = 0" for x in xs)
        matrix = parse(f"{cube} and {g} = 0")
        params = sorted(v for v in g.used_variables() if v.startswith("u"))
        for _ in range(100):
            alpha = {u: rng.randint(-2, 2) for u in params}
            holds, _ = eval_finite_exists(xs, matrix, cube_points(n), alpha)
            assert (delta.evaluate(alpha) == 0) == holds


def test_evaluate_at_matrices():
    M = mult_matrices_cube(1)
    A = evaluate_at_matrices(P("u1*x1 + u2"), M)
    assert det(A) == P("u2*(u1 + u2)")


# partial evaluation

def test_partial_eval_examples():
    d = partial_eval_decompose(P("y^2 - (u1 + u2)*y + u1*u2"))
    assert d.ell == 2 and d.omegas == (P("u1*u2"), P("-u1 - u2"))
    assert d.skeleton == P("y^2 + t2*y + t1")
    assert d.reconstruct() == P("y^2 - (u1 + u2)*y + u1*u2")
    z = partial_eval_decompose(P("y^4"))
    assert z.ell == 4 and z.scalar_count == 0 and all(w == 0 for w in z.omegas)
    with pytest.raises(NotMonic):
        partial_eval_decompose(P("2*y^2 + u1"))


def test_partial_eval_fresh_names():
    d = partial_eval_decompose(P("y^2 + t1*y + t2"))
    assert not set(d.tvars) & {"t1", "t2"}
    assert d.reconstruct() == P("y^2 + t1*y + t2")


def test_partial_eval_roundtrip_random():
    rng = random.Random(12)
    for _ in range(60):
        n = rng.randint(1, 3)
        P_ = eliminate_charpoly(cube_g(rng, n), mult_matrices_cube(n), emit_circuit=False).polynomial
        d = partial_eval_decompose(P_)
        assert d.reconstruct() == P_
        assert d.skeleton == partial_eval_decompose(P("y") ** d.ell).skeleton


def test_partial_eval_skeleton_independent_of_g():
    rng = random.Random(13)
    M = mult_matrices_cube(2)
    skels = {partial_eval_decompose(eliminate_charpoly(cube_g(rng, 2), M, emit_circuit=False).polynomial).skeleton
             for _ in range(10)}
    assert len(skels) == 1


# linear systems

def phi_2x2():
    return Matrix.from_rows([[P("u1"), P("u2")], [P("u3"), P("u4")]])


def test_check_spec_examples():
    Phi = phi_2x2()
    D = det(Phi)
    assert check_spec_dagger(Phi, D).kind == "Pass"
    assert check_spec_dagger(Phi, D * D).kind == "Pass"
    diag = Matrix.from_rows([[P("u1"), P("1")], [P("0"), P("1")]])
    v = check_spec_dagger(diag, P("u1 + 1"), samples=50)
    assert v.kind == "Fail"
    v = check_spec_dagger(Matrix.diag([P("u1"), P("1")]), det(Matrix.diag([P("u1"), P("1")])) + 1)
    assert v.kind == "Fail" and v.witness in ({"u1": 0}, {"u1": -1})


def test_check_spec_rejects_wrong_factor():
    Phi = phi_2x2()
    # vanishes on a strict subset of the singular locus
    v = check_spec_dagger(Phi, P("u1"), samples=60)
    assert v.kind == "Fail"


# resultants

def test_sylvester_examples():
    assert sylvester_resultant(P("a*x1 + b*x2"), P("c*x1 + d*x2"), 1, 1) == P("a*d - b*c")
    r = sylvester_resultant(P("x1^2 - u1*x2^2"), P("x1 - x2"), 2, 1)
    assert r in (P("1 - u1"), P("u1 - 1"))
    f = P("x1^2 + u1*x1*x2 + x2^2")
    assert sylvester_resultant(f, f, 2, 2) == 0
    with pytest.raises(NotHomogeneous):
        sylvester_resultant(P("x1^2 + x2"), P("x1"), 2, 1)
    with pytest.raises(DegreeMismatch):
        sylvester_resultant(P("x1 + x2"), P("x1"), 2, 1)


def test_sylvester_matches_sympy():
    rng = random.Random(21)
    x1, x2 = sympy.symbols("x1 x2")
    checked = 0
    for _ in range(30):
        d1, d2 = rng.randint(1, 3), rng.randint(1, 3)
        f = sympy.expand(sum(rng.randint(-3, 3) * x1 ** i * x2 ** (d1 - i) for i in range(d1 + 1)) + x1 ** d1)
        g = sympy.expand(sum(rng.randint(-3, 3) * x1 ** i * x2 ** (d2 - i) for i in range(d2 + 1)) + x2 ** d2)
        F, G = f.subs(x2, 1), g.subs(x2, 1)
        if sympy.degree(F, x1) != d1 or sympy.degree(G, x1) != d2:
            continue
        ours = sylvester_resultant(oracles.from_sympy(f, ("x1", "x2")), oracles.from_sympy(g, ("x1", "x2")), d1, d2)
        assert ours == int(oracles.resultant_companion(F, G, x1))
        checked += 1
    assert checked >= 10


def test_sylvester_vanishing_matches_root_search():
    for u in range(-3, 4):
        r = sylvester_resultant(P(f"x1^2 - {u}*x2^2"), P("x1 - x2"), 2, 1)
        common = any(a * a - u * b * b == 0 and a - b == 0 for a in range(-3, 4) for b in range(-3, 4) if (a, b) != (0, 0))
        assert (r == 0) == common


def test_linear_resultant():
    forms = [P("u1*x1 + u2*x2"), P("u3*x1 + u4*x2")]
    assert linear_resultant(forms, ("x1", "x2")) == P("u1*u4 - u2*u3")
    with pytest.raises(NotHomogeneous):
        linear_resultant([P("x1 + 1"), P("x2")], ("x1", "x2"))


# sanity checks

def test_degree_sanity():
    for n in range(1, 4):
        P_ = eliminate_charpoly(P("u1*x1 + x%d" % n), mult_matrices_cube(n), emit_circuit=False).polynomial
        assert P_.degree("y") == 2 ** n
        assert degree_sanity(P_, 2 ** n, 1 + 1).kind == "Pass"
    assert degree_sanity(oracle_elimination_poly(P("u1*x1^2 + u2"), 2), 4, 3).kind == "Pass"
    assert degree_sanity(P("2*y^2 + u1"), 2, 1).kind == "Fail"
    assert degree_sanity(P("y^5"), 4, 1).kind == "Fail"


def test_flat_fiber_examples():
    assert flat_fiber_check([(0, 0), (0, 1), (1, 0), (1, 1)], ()).kind == "Pass"
    v = flat_fiber_check([(P("u1"),), (P("2*u1"),)], ("u1",))
    assert v.kind == "Fail" and v.witness == (0,)
    assert flat_fiber_check([(P("u1"),), (P("u1 + 1"),)], ("u1",)).kind == "Pass"


def test_oracle_result_emits_circuit():
    r = oracle_result(P("u1*x1"), 1)
    assert r.kind == "oracle" and expand_to_polynomials(r.circuit) == [RationalFunction(P("y*(y - u1)"))]
    assert r.sidecar()["poly"] == str(r.polynomial)


@given(st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_det_is_signed_charpoly_constant(cs):
    g = Polynomial({(1, 0): cs[0], (0, 1): cs[1], (0, 0): cs[2]}, ("x1", "x2"))
    M = mult_matrices_cube(2)
    d = eliminate_det(g, M, emit_circuit=False).polynomial
    c = eliminate_charpoly(g, M, emit_circuit=False).polynomial
    assert d == c.subs({"y": 0})  # N = 4 is even
    prod = 1
    for e in cube_points(2):
        prod *= cs[0] * e[0] + cs[1] * e[1] + cs[2]
    assert d == prod
