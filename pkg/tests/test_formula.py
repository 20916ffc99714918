import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from geoelim.constraintdb import Instance
from geoelim.exactalg import GaussianRational, MissingAssignment, Polynomial
from geoelim.formula import (
    TRUE, And, Atom, ArityMismatch, Const, Context, Exists, Forall, FormulaSyntaxError,
    FuncApp, ModeError, Not, RelApp, UnboundSchemaSymbol, UndeclaredSymbol, cube_points,
    eval_finite, eval_finite_exists, eval_qf, free_symbols, is_quantifier_free, parse,
    prenex, render, substitute_schema, substitute_symbols,
)

HEMI = "x^2+y^2+z^2 = 1 and z >= 0"

CORPUS = [
    HEMI,
    "y = F(F(x))",
    "forall x: forall y: forall z: S(x,y,z) -> x^2+y^2+z^2 < r^2",
    "exists x1: exists x2: x1^2 - x1 = 0 and x2^2 - x2 = 0 and u1*x1 + u2*x2 = 0",
    "F1(x1, x2) = 0 and F2(x1, x2) = 0 and G(u1, u2, x1, x2) != 0",
    "not (x < 0) or x = 0",
    "exists x: forall y: exists z: x + y <= z",
    "true and false or 1/2*x >= -3/4",
    "(x - 1)^3 = u1 * (x + 2)",
    "-x^2 + 1 > 0",
    "y^2 - (u1 + u2)*y + u1*u2 = 0",
    "S(x, y, z) <-> x = y",
]


@pytest.mark.parametrize("text", CORPUS)
def test_roundtrip_corpus(text):
    f = parse(text)
    again = parse(render(f))
    assert again == f
    assert render(again) == render(f)


def test_hemisphere_ast():
    f = parse(HEMI)
    assert isinstance(f, And) and len(f.args) == 2
    assert all(isinstance(a, Atom) for a in f.args)
    assert f.args[1].op == ">="


def test_nested_funcapp():
    f = parse("y = F(F(x))")
    rhs = f.rhs
    assert isinstance(rhs, FuncApp) and isinstance(rhs.args[0], FuncApp)


def test_complex_mode_gate():
    with pytest.raises(ModeError):
        parse("exists x: x < x", Context(mode="complex"))
    assert parse("x != 1", Context(mode="complex"))


def test_syntax_errors():
    for bad in ["x = ", "x + = 1", "(x = 1", "exists : x = 1", "x ^ y = 1", "x @ 1"]:
        with pytest.raises(FormulaSyntaxError):
            parse(bad)


def test_strict_context_errors():
    ctx = Context(params=("u1",), vars=("x1",), relations={"S": 1}, functions={"F": 1}, strict=True)
    assert parse("S(x1) and F(x1) = u1", ctx)
    with pytest.raises(UndeclaredSymbol):
        parse("x2 = 0", ctx)
    with pytest.raises(ArityMismatch):
        parse("S(x1, x1)", ctx)
    with pytest.raises(ArityMismatch):
        parse("F(x1, u1) = 0", ctx)


def test_declaration_beats_spelling():
    ctx = Context(params=("x",), vars=("u",), strict=True)
    fs = free_symbols(parse("x*u = 1", ctx))
    assert fs.parameters == {"x"} and fs.variables == {"u"}


def test_free_symbols_examples():
    fs = free_symbols(parse(CORPUS[2], Context(params=("r",))))
    assert fs.variables == set() and fs.relations == {"S"}
    fs = free_symbols(parse(CORPUS[4]))
    assert fs.parameters == {"u1", "u2"} and fs.functions == {"F1", "F2", "G"}
    assert free_symbols(parse("x = x")).variables == {"x"}


def test_parameters_are_never_bound():
    with pytest.raises(FormulaSyntaxError):
        parse("exists u1: u1 = 0", Context(params=("u1",), strict=True))


def hemisphere_instance():
    return Instance(("r",), ("x", "y", "z"), relations={"S": parse(HEMI)})


def test_boundedness_substitution():
    q = parse(CORPUS[2])
    out = substitute_schema(q, hemisphere_instance())
    want = parse("forall x: forall y: forall z: (x^2+y^2+z^2 = 1 and z >= 0) -> x^2+y^2+z^2 < r^2")
    assert out == want
    fs = free_symbols(out)
    assert not fs.relations and not fs.functions


def test_function_composition():
    inst = Instance((), ("x",), functions={"F": Polynomial.parse("x^2")})
    out = substitute_schema(parse("y = F(F(x))"), inst)
    # evaluate rather than compare syntax: both sides must agree everywhere
    for xv in range(-3, 4):
        for yv in (0, 1, 16, 81):
            assert eval_qf(out, {"x": xv, "y": yv}) == (yv == xv ** 4)
    assert not free_symbols(out).functions


def test_substitution_identity_and_unbound():
    f = parse("x + 1 = 0")
    assert substitute_schema(f, hemisphere_instance()) == f
    with pytest.raises(UnboundSchemaSymbol):
        substitute_schema(parse("T(x) and x = 1"), hemisphere_instance())


def test_argument_substitution_is_simultaneous():
    inst = Instance((), ("x", "y"), relations={"R": parse("x < y + 1/2")})
    out = substitute_schema(parse("R(y, x)"), inst)
    assert eval_qf(out, {"x": 0, "y": 0})
    assert eval_qf(out, {"x": 1, "y": 0}) and not eval_qf(out, {"x": 0, "y": 1})


def test_bound_query_variables_survive():
    inst = Instance((), ("x", "y"), relations={"R": parse("x = y + 1")})
    out = substitute_schema(parse("exists y: R(x, y)"), inst)
    assert eval_finite(out, range(-3, 4), {"x": 2})
    assert free_symbols(out).variables == {"x"}


def _random_poly(rng, names):
    terms = {}
    for _ in range(3):
        e = tuple(rng.randint(0, 2) for _ in names)
        terms[e] = rng.randint(-4, 4)
    return Polynomial(terms, names)


def test_substitution_commutes_with_specialization():
    rng = random.Random(11)
    names = ("u1", "x1", "x2")
    for _ in range(40):
        inst = Instance(("u1",), ("x1", "x2"),
                        functions={"F": _random_poly(rng, names)},
                        relations={"S": parse("u1*x1 <= x2^2")})
        q = parse("exists x1: (F(x1, x2) = u1 and S(x1, x2)) or F(x2, x1) > 0")
        u = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
        a = substitute_symbols(substitute_schema(q, inst), {"u1": Const(u)})
        spec = Instance((), ("x1", "x2"),
                        functions={"F": inst.functions["F"][0].subs({"u1": u})},
                        relations={"S": substitute_symbols(inst.relations["S"], {"u1": Const(u)})})
        b = substitute_schema(q, spec)
        for x2 in range(-2, 3):
            env = {"x2": x2, "u1": u}
            assert eval_finite(a, range(-2, 3), env) == eval_finite(b, range(-2, 3), env)


def test_prenex_examples():
    info = prenex(parse("exists x: exists y: x = y"))
    assert info.alternations == 0 and len(info.prefix) == 2
    info = prenex(parse("exists x: forall y: exists z: x + y = z"))
    assert info.alternations == 2
    info = prenex(parse("not exists x: x = 1"))
    assert info.prefix[0][0] == "forall" and is_quantifier_free(info.matrix)
    assert isinstance(info.matrix, Not) or info.matrix == parse("x != 1")


_atoms = st.sampled_from(["x = y", "x < z", "y + z = 1", "x*y = z", "true", "z >= x"])


@st.composite
def formulas(draw, depth=3):
    if depth == 0:
        return draw(_atoms)
    k = draw(st.integers(0, 6))
    a = draw(formulas(depth - 1))
    if k == 0:
        return a
    if k == 1:
        return f"not ({a})"
    if k in (2, 3):
        b = draw(formulas(depth - 1))
        op = {2: "and", 3: "or"}[k]
        return f"({a}) {op} ({b})"
    if k == 4:
        b = draw(formulas(depth - 1))
        return f"({a}) -> ({b})"
    q = "exists" if k == 5 else "forall"
    v = draw(st.sampled_from("xyz"))
    return f"{q} {v}: ({a})"


@given(formulas())
def test_prenex_preserves_truth(text):
    f = parse(text)
    info = prenex(f)
    assert is_quantifier_free(info.matrix)
    assert info.alternations <= len(info.prefix)
    g = info.formula()
    free = sorted(free_symbols(f).variables)
    assert free_symbols(g).variables <= set(free) | set()
    for vals in itertools.product((0, 1), repeat=len(free)):
        env = dict(zip(free, vals))
        assert eval_finite(f, (0, 1), env) == eval_finite(g, (0, 1), env)


@given(formulas())
def test_roundtrip_random(text):
    f = parse(text)
    assert parse(render(f)) == f


def test_eval_qf_examples():
    f = parse(HEMI)
    assert eval_qf(f, {"x": 0, "y": 0, "z": 1})
    assert not eval_qf(f, {"x": 0, "y": 0, "z": -1})
    assert eval_qf(parse("1=1 or x<0"), {"x": 5})
    with pytest.raises(MissingAssignment):
        eval_qf(parse("x + y = 0"), {"x": 1})


def test_eval_qf_complex():
    i = GaussianRational(0, 1)
    assert eval_qf(parse("x^2 + 1 = 0"), {"x": i})
    assert eval_qf(parse("x != 1"), {"x": i})


def test_eval_finite_exists_examples():
    m = parse("x1^2 - x1 = 0 and x1 - 1 = 0")
    ok, w = eval_finite_exists(["x1"], m, cube_points(1))
    assert ok and w == {"x1": 1}
    ok, w = eval_finite_exists(["x1"], parse("x1^2 - x1 = 0 and x1 - 2 = 0"), cube_points(1))
    assert not ok and w is None
    assert eval_finite_exists(["x1"], TRUE, []) == (False, None)


def test_relapp_must_be_substituted():
    with pytest.raises(TypeError):
        eval_qf(RelApp("S", ()), {})
    with pytest.raises(TypeError):
        eval_qf(Exists("x", TRUE), {})
    assert isinstance(parse("forall x: x = x"), Forall)
