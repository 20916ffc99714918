import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from geoelim.circuit import (
    CircuitBuilder, InadmissiblePoint, eval_in_ring, expand_to_polynomials, from_polynomial,
    metrics,
)
from geoelim.elimstack import SizeLimitExceeded, partial_eval_decompose, eliminate_charpoly, mult_matrices_cube
from geoelim.exactalg import GaussianRational, Polynomial, RationalFunction
from geoelim.formula import Context, eval_qf, free_symbols, parse, render
from geoelim.samplelab import (
    CSV_HEADER, BranchingFreeRep, NotFoundWithinBudget, RatFamily, SamplePoint,
    check_branching_free_rep, coefficient_map, dense_rep, derivative_rows,
    extended_sample_specialize, family_polynomial, gn_family, identification_formula,
    identification_points, identification_sequence, lowerbound_experiment, report_csv,
    sample_point, vandermonde_certificate, write_report,
)

import oracles

P = Polynomial.parse


def complement(eps):
    return [1 - e for e in eps]


def test_gn_small():
    g1 = family_polynomial(gn_family(1))
    assert g1 == P("t*l1 + t*x1")
    fam = gn_family(2)
    assert fam.params == ("t", "l1", "l2") and fam.vars == ("x1", "x2")
    # coefficient functions t*l1*l2, t*l1, t*l2, t
    coeffs = {RationalFunction(c) for c in (P("t*l1*l2"), P("t*l1"), P("t*l2"), P("t"))}
    assert set(dense_rep(fam).scalars) == coeffs
    assert dense_rep(fam).s == 4


def test_gn_circuit_shape():
    for n in range(1, 7):
        c = gn_family(n).circuit
        ops = [nd.op for nd in c.nodes]
        assert ops.count("add") == n
        # the product of n+1 factors t, (l1+x1), ..., (ln+xn)
        assert ops.count("mul") == n
        assert metrics(c).total_size == 2 * n


def test_gn_coefficients_complement_structure():
    for n in range(1, 13):
        g = family_polynomial(gn_family(n))
        assert len(g.terms) == 2 ** n
    for n in range(1, 5):
        g = family_polynomial(gn_family(n))
        names = g.indeterminates
        for e, c in g.terms.items():
            d = dict(zip(names, e))
            eps = [d.get(f"x{i}", 0) for i in range(1, n + 1)]
            ls = [d.get(f"l{i}", 0) for i in range(1, n + 1)]
            assert c == 1 and d["t"] == 1 and ls == complement(eps)
    with pytest.raises(SizeLimitExceeded):
        gn_family(13)


def test_gn_vanishes_at_t_zero():
    for n in range(1, 6):
        rep = dense_rep(gn_family(n))
        for s in rep.scalars:
            assert s.num.subs({"t": 0}).is_zero()


def test_extended_sample_examples():
    fam = gn_family(1)
    c = extended_sample_specialize(fam, (2, 3))
    assert expand_to_polynomials(c) == [RationalFunction(P("2*x1 + 6"))]
    assert c.params == ()
    assert expand_to_polynomials(extended_sample_specialize(fam, (0, 3))) == [0]
    b = CircuitBuilder(("u1",), ("x1",))
    b.output(b.mul(b.scalar(RationalFunction(P("1"), P("u1 - 1"))), b.var("x1")))
    pole = RatFamily(("u1",), ("x1",), b.build())
    with pytest.raises(InadmissiblePoint):
        extended_sample_specialize(pole, (1,))
    dom = RatFamily(fam.params, fam.vars, fam.circuit, parse("t > 0", Context(params=fam.params, strict=False)))
    with pytest.raises(InadmissiblePoint):
        extended_sample_specialize(dom, (-1, 0))


def test_extended_sample_matches_substitution():
    rng = random.Random(6)
    for n in range(1, 7):
        fam = gn_family(n)
        g = family_polynomial(fam)
        for _ in range(100):
            u = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in fam.params]
            x = {v: Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for v in fam.vars}
            c = extended_sample_specialize(fam, u)
            assert eval_in_ring(c, {}, x) == [g.evaluate({**dict(zip(fam.params, u)), **x})]


def test_branching_free_reps():
    for n in range(1, 4):
        fam = gn_family(n)
        assert check_branching_free_rep(dense_rep(fam), fam).kind == "Pass"
        assert check_branching_free_rep(BranchingFreeRep(fam.circuit), fam).kind == "Pass"
        bad = family_polynomial(fam) + P("t*x1")
        corrupted = BranchingFreeRep(from_polynomial(bad, fam.vars, fam.params))
        assert check_branching_free_rep(corrupted, fam).kind == "Fail"


def test_coefficient_map_examples():
    fam = gn_family(1)
    mu = coefficient_map(fam, [(0,), (1,)])
    assert mu((1, 1)) == (1, 2)
    assert mu((0, 7)) == (0, 0)
    fam2 = gn_family(2)
    mu2 = coefficient_map(fam2, identification_points(1, 2))
    # every member with t = 0 is the zero polynomial
    assert mu2((0, 1, 2)) == mu2((0, 5, -3))
    assert mu2((1, 1, 2)) != mu2((1, 2, 1))


def test_identification_examples():
    assert len(identification_points(1, 1)) == 18
    rep = identification_sequence(1, 1, seed=0, pairs=500)
    assert rep.m == 18 and rep.pairs_tested == 500
    assert rep.collisions == []
    assert identification_points(1, 1, seed=0) == identification_points(1, 1, seed=0)
    assert len(identification_points(2, 3)) == 4 * 25 + 2


def test_identification_formula():
    f = identification_formula(0, 1)
    fs = free_symbols(f)
    assert fs.parameters == {f"w{k}" for k in range(1, 7)} and not fs.variables
    ctx = Context(params=tuple(sorted(fs.parameters)))
    assert parse(render(f), ctx) == f


def test_vandermonde_certificate_examples():
    c1 = vandermonde_certificate(1)
    assert c1.det_value == 1 and c1.certified_bound == 2 and c1.achieved >= 2
    c2 = vandermonde_certificate(2)
    assert c2.det_value == oracles.VANDERMONDE_1_TO_4 and c2.certified_bound == 4
    c3 = vandermonde_certificate(3)
    assert c3.det_value == oracles.VANDERMONDE_1_TO_8 and c3.certified_bound == 8
    for c in (c1, c2, c3):
        assert c.symbolic_check is True
    with pytest.raises(SizeLimitExceeded):
        vandermonde_certificate(6)


def test_certificates_tight_and_closed_form():
    for n in range(1, 6):
        c = vandermonde_certificate(n)
        assert c.det_value == oracles.superfactorial_det(2 ** n)
        assert c.achieved == c.certified_bound == 2 ** n
        doc = json.loads(json.dumps(c.to_json()))
        assert doc["det_value"] == str(c.det_value)


def test_derivative_rows_are_vandermonde():
    for n in range(1, 4):
        N = 2 ** n
        assert derivative_rows(n) == [[rho ** j for j in range(N)] for rho in range(1, N + 1)]


def test_partial_eval_scalars_of_gn_charpoly():
    # scalars of the charpoly of a gn member: 2^n coefficient functions
    for n in range(1, 4):
        g = family_polynomial(gn_family(n))
        P_ = eliminate_charpoly(g, mult_matrices_cube(n), emit_circuit=False).polynomial
        d = partial_eval_decompose(P_)
        assert d.ell == 2 ** n and d.scalar_count == 2 ** n


HEMI = parse("x^2 + y^2 + z^2 = 1 and z >= 0")


def test_sample_point_examples():
    r = sample_point(HEMI, ("x", "y", "z"))
    assert isinstance(r, SamplePoint) and eval_qf(HEMI, r.point)
    cube = parse("x1^2 - x1 = 0 and x2^2 - x2 = 0 and x1 + x2 = 2")
    r = sample_point(cube, ("x1", "x2"))
    assert r.point == {"x1": 1, "x2": 1} and r.exhaustive
    empty = parse("x1^2 - x1 = 0 and x1 = 2")
    r = sample_point(empty, ("x1",))
    assert isinstance(r, NotFoundWithinBudget) and r.exhaustive
    r = sample_point(parse("x^2 < 0"), ("x",), budget=2000)
    assert isinstance(r, NotFoundWithinBudget) and not r.exhaustive and r.searched == 2000


def test_sample_point_complex():
    f = parse("x^2 + 1 = 0", Context(mode="complex"))
    r = sample_point(f, ("x",), mode="complex")
    assert isinstance(r, SamplePoint) and r.point["x"] in (GaussianRational(0, 1), GaussianRational(0, -1))


def test_sample_point_deterministic():
    f = parse("2*x*y = 3 and x > 1")
    a = sample_point(f, ("x", "y"), seed=4)
    b = sample_point(f, ("x", "y"), seed=4)
    assert a == b and eval_qf(f, a.point)


_atoms = st.sampled_from([
    "x = 1/2", "x*y = 3", "x + y > 2", "y^2 = 4", "x^2 + y^2 = 25", "x <= -1", "x != y", "3*x = 2*y",
])


@given(st.lists(_atoms, min_size=1, max_size=3), st.booleans())
def test_sample_point_never_unverified(parts, use_or):
    f = parse((" or " if use_or else " and ").join(parts))
    r = sample_point(f, ("x", "y"), budget=600)
    if isinstance(r, SamplePoint):
        assert eval_qf(f, r.point)


def test_lowerbound_rows():
    rows = lowerbound_experiment(1, 3, seed=0, charpoly_max_n=3, repeats=1)
    assert [(r.n, r.achieved_scalars, r.certified_bound) for r in rows] == [(1, 2, 2), (2, 4, 4), (3, 8, 8)]
    assert all(r.vandermonde_det_nonzero is True for r in rows)
    text = report_csv(rows, timing=False)
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert report_csv(rows, timing=False) == report_csv(lowerbound_experiment(1, 3, 0, charpoly_max_n=3, repeats=1), timing=False)
    wide = lowerbound_experiment(6, 7, seed=0, cert_max_n=5, charpoly_max_n=0, repeats=1)
    assert [r.vandermonde_det_nonzero for r in wide] == ["closed-form", "closed-form"]
    assert [r.achieved_scalars for r in wide] == [64, 128]


def test_write_report(tmp_path):
    rows = lowerbound_experiment(1, 2, seed=0, charpoly_max_n=2, repeats=1)
    written = write_report(rows, str(tmp_path / "report.csv"), timing=False)
    assert sorted(p.rsplit("/", 1)[1] for p in written) == ["certificate_n1.json", "certificate_n2.json", "report.csv"]
    doc = json.loads((tmp_path / "certificate_n2.json").read_text())
    assert doc["det_value"] == "12"
