"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 parse error, 3 semantic error
(inadmissible point, arity mismatch, size limits), 4 budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Dict, List, Optional

from . import circuit as circ
from .constraintdb import (
    Instance, NoEquivalentPairs, QueryEvaluationError, SchemaError, check_geometric_invariance, difference_pair_generator,
    instance_from_json, product_pair_generator, search_pair_generator,
)
from .elimstack import (
    DegreeMismatch, DuplicatePoints, NotHomogeneous, NotMonic, NotPolynomial,
    SizeLimitExceeded, charpoly_query, check_spec_dagger, det_query, eliminate_charpoly,
    eliminate_det, linear_resultant, mult_matrices_cube, mult_matrices_points, oracle_result,
    partial_eval_decompose, sylvester_resultant,
)
from .exactalg.matrix import Matrix
from .exactalg.polynomial import Polynomial, UnknownSymbol
from .exactalg.rational import format_rational, parse_rational
from .exactalg.rings import MissingAssignment, RingMismatch
from .fileio import write_atomic
from .formula.logic import UnboundSchemaSymbol, free_symbols, prenex, substitute_schema
from .formula.parser import (
    ArityMismatch, Context, FormulaSyntaxError, ModeError, UndeclaredSymbol, parse,
)
from .samplelab import (
    NotFoundWithinBudget, RatFamily, extended_sample_specialize, gn_family,
    lowerbound_experiment, report_csv, sample_point, write_report,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# input helpers

def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_db(path: str, mode: Optional[str]) -> Instance:
    doc = _read_json(path)
    if mode is not None:
        doc = dict(doc, mode=mode)
    return instance_from_json(doc)


def _names(text: Optional[str]) -> tuple:
    if not text:
        return ()
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _point(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(parse_rational(s.strip()) for s in text.split(","))


def _assign(text: Optional[str]) -> Dict[str, object]:
    out = {}
    for part in _names(text):
        if "=" not in part:
            raise UsageError(f"expected name=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = parse_rational(v.strip())
    return out


def _fmt(v) -> str:
    try:
        return format_rational(v)
    except (TypeError, ValueError):
        return str(v)


def _fmt_point(p) -> str:
    if isinstance(p, dict):
        return "{" + ", ".join(f"{k}={_fmt(v)}" for k, v in p.items()) + "}"
    return "(" + ",".join(_fmt(c) for c in p) + ")"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _db_function(inst: Instance, spec: str) -> Polynomial:
    """A function name of the instance, or polynomial text over its symbols."""
    if spec in inst.functions:
        num, den = inst.functions[spec]
        if den != 1:
            raise SchemaError(f"function {spec!r} has a non-constant denominator")
        return num
    p = Polynomial.parse(spec)
    bad = [v for v in p.used_variables() if v not in inst.params + inst.vars]
    if bad:
        raise UnknownSymbol(bad[0])
    return p


# subcommands

def cmd_parse(a) -> int:
    ctx = Context(_names(a.params), _names(a.vars), mode=a.mode or "real", strict=bool(a.params or a.vars))
    text = a.formula if a.formula is not None else open(a.file, encoding="utf-8").read()
    f = parse(text, ctx)
    fs = free_symbols(f)
    lines = [f"formula: {f}",
             f"free variables: {', '.join(sorted(fs.variables))}",
             f"parameters: {', '.join(sorted(fs.parameters))}",
             f"relations: {', '.join(sorted(fs.relations))}",
             f"functions: {', '.join(sorted(fs.functions))}"]
    if a.prenex:
        info = prenex(f)
        lines.append(f"prenex: {info.formula()}")
        lines.append(f"alternations: {info.alternations}")
    _emit("\n".join(lines) + "\n", a.out)
    return 0


def cmd_apply_query(a) -> int:
    inst = _load_db(a.db, a.mode)
    ctx = Context(params=inst.params, vars=inst.vars, mode=inst.mode)
    text = a.query if a.query is not None else open(a.query_file, encoding="utf-8").read()
    q = parse(text, ctx)
    out = substitute_schema(q, inst)
    lines = [f"result: {out}"]
    if a.prenex:
        lines.append(f"prenex: {prenex(out).formula()}")
    _emit("\n".join(lines) + "\n", a.out)
    return 0


def _mult(a, inst: Instance):
    if a.points:
        pts = [_point(p) for p in a.points.split(";")]
        return mult_matrices_points(pts, inst.vars)
    return mult_matrices_cube(len(inst.vars), max_n=a.max_n, var_names=inst.vars)


def cmd_eliminate(a) -> int:
    inst = _load_db(a.db, a.mode)
    g = _db_function(inst, a.g)
    if a.method == "oracle":
        domain = [_point(p) for p in a.points.split(";")] if a.points else len(inst.vars)
        if isinstance(domain, int) and domain > a.max_n:
            raise SizeLimitExceeded(f"n={domain} exceeds the configured limit {a.max_n}")
        res = oracle_result(g, domain, a.y, var_names=inst.vars)
    else:
        M = _mult(a, inst)
        if a.method == "det":
            res = eliminate_det(g, M)
        else:
            res = eliminate_charpoly(g, M, a.y)
    circuit_text = circ.dumps(res.circuit)
    sidecar_text = json.dumps(res.sidecar(), indent=2) + "\n"
    if a.out:
        sidecar = a.sidecar or _sidecar_path(a.out)
        write_atomic(a.out, circuit_text)
        write_atomic(sidecar, sidecar_text)
    sys.stdout.write(f"kind: {res.kind}\nterm_count: {res.term_count}\n"
                     f"metrics: {json.dumps(res.metrics.as_dict(), sort_keys=True)}\n"
                     f"poly: {res.polynomial}\n")
    return 0


def _sidecar_path(out: str) -> str:
    return (out[:-5] if out.endswith(".json") else out) + ".sidecar.json"


def cmd_partial_eval(a) -> int:
    if a.poly is not None:
        P = Polynomial.parse(a.poly)
    else:
        P = Polynomial.parse(_read_json(a.sidecar_in)["poly"])
    d = partial_eval_decompose(P, a.y)
    doc = {"ell": d.ell, "omegas": [str(w) for w in d.omegas], "skeleton": str(d.skeleton),
           "scalar_count": d.scalar_count, "reconstructs": d.reconstruct() == P}
    _emit(json.dumps(doc, indent=2) + "\n", a.out)
    return 0


def cmd_resultant(a) -> int:
    if a.kind == "linear":
        forms = [Polynomial.parse(s) for s in a.forms.split(";")]
        r = linear_resultant(forms, _names(a.vars))
    else:
        r = sylvester_resultant(Polynomial.parse(a.f), Polynomial.parse(a.g), a.d1, a.d2, a.x1, a.x2)
    _emit(f"{r}\n", a.out)
    return 0


def _matrix(text: str) -> Matrix:
    rows = [[Polynomial.parse(e) for e in r.split(",")] for r in text.split(";")]
    return Matrix.from_rows(rows, Polynomial.zero())


def cmd_check_spec(a) -> int:
    Phi = _matrix(a.matrix)
    v = check_spec_dagger(Phi, Polynomial.parse(a.F), a.samples, a.seed)
    if v.ok:
        sys.stdout.write(f"Pass ({v.trials} samples)\n")
    else:
        sys.stdout.write(f"Fail at {_fmt_point(v.witness)}: {v.detail}\n")
    return 0


def _first_param_query(inst: Instance) -> Instance:
    """Maps every function to its first parameter (a non-geometric query)."""
    u1 = Polynomial.var(inst.params[0])
    return Instance(inst.params, inst.vars, {}, {name: (u1, Polynomial.const(1)) for name in inst.functions},
                    inst.mode)


def cmd_check_geometric(a) -> int:
    inst = _load_db(a.db, a.mode)
    M = mult_matrices_cube(len(inst.vars), max_n=a.max_n, var_names=inst.vars)
    queries = {"det": lambda: det_query(M, a.function), "charpoly": lambda: charpoly_query(M, a.function),
               "identity": lambda: (lambda i: i), "first-param": lambda: _first_param_query}
    query = queries[a.query]()
    if a.pair:
        p1, p2 = (_point(s) for s in a.pair.split(";"))
        gen = lambda rng: (p1, p2)  # noqa: E731
    elif a.pairs == "product":
        gen = product_pair_generator(inst.m)
    elif a.pairs == "difference":
        gen = difference_pair_generator(inst.m)
    else:
        gen = search_pair_generator(inst)
    v = check_geometric_invariance(query, inst, gen, a.trials, a.seed)
    if v.kind == "Pass":
        sys.stdout.write(f"Pass ({v.trials} pairs)\n")
    else:
        p1, p2 = v.witness
        sys.stdout.write(f"Fail with witness pair {_fmt_point(p1)} / {_fmt_point(p2)}\n")
    return 0


def cmd_sample_point(a) -> int:
    vars = _names(a.vars)
    ctx = Context(vars=vars, mode=a.mode or "real")
    f = parse(a.formula, ctx)
    if not vars:
        vars = tuple(sorted(free_symbols(f).variables))
    r = sample_point(f, vars, a.budget, a.seed, a.mode or "real")
    if isinstance(r, NotFoundWithinBudget):
        if r.exhaustive:
            sys.stdout.write(f"no point: exhaustive search of {r.searched} candidates\n")
            return 0
        sys.stdout.write(f"not found within budget ({r.searched} candidates)\n")
        return 4
    sys.stdout.write(f"point: {_fmt_point(r.point)}\ncertificate: verified{' (exhaustive search)' if r.exhaustive else ''}\n")
    return 0


def cmd_extended_sample(a) -> int:
    if a.circuit:
        c = circ.loads(open(a.circuit, encoding="utf-8").read())
        fam = RatFamily(c.params, c.vars, c)
    else:
        fam = gn_family(a.n, max_n=a.max_n)
    out = extended_sample_specialize(fam, _point(a.u))
    text = circ.dumps(out)
    if a.out:
        write_atomic(a.out, text)
    (p,) = circ.expand_to_polynomials(out)
    sys.stdout.write(f"f_u = {p}\n")
    return 0


def cmd_circuit(a) -> int:
    c = circ.loads(open(a.file, encoding="utf-8").read())
    if a.action == "stats":
        v = circ.validate(c, real_mode=(a.mode or "real") == "real")
        doc = {"classification": v.kind, **circ.metrics(c).as_dict(), "nodes": len(c.nodes),
               "outputs": len(c.outputs)}
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    elif a.action == "eval":
        vals = circ.eval_in_ring(c, _assign(a.params), _assign(a.vars))
        for (i, mark), v in zip(c.outputs, vals):
            sys.stdout.write(f"node {i}{' ' + mark if mark else ''}: {_fmt(v)}\n")
    else:
        for (i, mark), p in zip(c.outputs, circ.expand_to_polynomials(c)):
            sys.stdout.write(f"node {i}{' ' + mark if mark else ''}: {p}\n")
    return 0


def cmd_lowerbound(a) -> int:
    if a.n_max > a.max_n:
        raise SizeLimitExceeded(f"n_max={a.n_max} exceeds the configured limit {a.max_n}")
    rows = lowerbound_experiment(a.n_min, a.n_max, a.seed, charpoly_max_n=a.charpoly_max_n)
    if a.out:
        write_report(rows, a.out, timing=not a.no_timing)
    sys.stdout.write(report_csv(rows, timing=not a.no_timing))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--mode", choices=("real", "complex"), default=None)
    common.add_argument("--max-n", type=int, default=12, dest="max_n")
    common.add_argument("--out", default=None)

    p = _Parser(prog="geoelim", description="Geometric elimination for constraint databases.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("parse", parents=[common], help="parse and inspect a formula")
    s.add_argument("formula", nargs="?")
    s.add_argument("--file")
    s.add_argument("--params")
    s.add_argument("--vars")
    s.add_argument("--prenex", action="store_true")
    s.set_defaults(func=cmd_parse)

    s = sub.add_parser("apply-query", parents=[common], help="substitute a database instance into a query")
    s.add_argument("--db", required=True)
    s.add_argument("--query")
    s.add_argument("--query-file", dest="query_file")
    s.add_argument("--prenex", action="store_true")
    s.set_defaults(func=cmd_apply_query)

    s = sub.add_parser("eliminate", parents=[common], help="eliminate the cube variables")
    s.add_argument("--db", required=True)
    s.add_argument("--g", required=True, help="function name or polynomial text")
    s.add_argument("--method", choices=("det", "charpoly", "oracle"), default="charpoly")
    s.add_argument("--y", default="y")
    s.add_argument("--points", help="explicit point variety 'a,b;c,d' instead of the cube")
    s.add_argument("--sidecar")
    s.set_defaults(func=cmd_eliminate)

    s = sub.add_parser("partial-eval", parents=[common], help="split P into scalars and skeleton")
    s.add_argument("--poly")
    s.add_argument("--from", dest="sidecar_in")
    s.add_argument("--y", default="y")
    s.set_defaults(func=cmd_partial_eval)

    s = sub.add_parser("resultant", parents=[common], help="linear or Sylvester resultant")
    s.add_argument("kind", choices=("linear", "sylvester"))
    s.add_argument("--forms")
    s.add_argument("--vars", default="x1,x2")
    s.add_argument("--f")
    s.add_argument("--g")
    s.add_argument("--d1", type=int)
    s.add_argument("--d2", type=int)
    s.add_argument("--x1", default="x1")
    s.add_argument("--x2", default="x2")
    s.set_defaults(func=cmd_resultant)

    s = sub.add_parser("check-spec", parents=[common], help="check a linear-system specification")
    s.add_argument("--matrix", required=True, help="rows separated by ';', entries by ','")
    s.add_argument("--F", required=True)
    s.add_argument("--samples", type=int, default=50)
    s.set_defaults(func=cmd_check_spec)

    s = sub.add_parser("check-geometric", parents=[common], help="geometric invariance harness")
    s.add_argument("--db", required=True)
    s.add_argument("--query", choices=("det", "charpoly", "identity", "first-param"), default="det")
    s.add_argument("--function", help="function to eliminate when the instance has several")
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--pairs", choices=("search", "product", "difference"), default="search")
    s.add_argument("--pair", help="explicit parameter pair 'a,b;c,d'")
    s.set_defaults(func=cmd_check_geometric)

    s = sub.add_parser("sample-point", parents=[common], help="certified sample point of a formula")
    s.add_argument("formula")
    s.add_argument("--vars")
    s.add_argument("--budget", type=int, default=20000)
    s.set_defaults(func=cmd_sample_point)

    s = sub.add_parser("extended-sample", parents=[common], help="specialize a rational family")
    s.add_argument("--circuit")
    s.add_argument("--n", type=int, default=1, help="use the product family of this size")
    s.add_argument("--u", required=True, help="parameter point 'a,b,...'")
    s.set_defaults(func=cmd_extended_sample)

    s = sub.add_parser("circuit", parents=[common], help="inspect a circuit file")
    s.add_argument("action", choices=("stats", "eval", "expand"))
    s.add_argument("file")
    s.add_argument("--params", help="u1=2,u2=5")
    s.add_argument("--vars", help="x1=3")
    s.set_defaults(func=cmd_circuit)

    s = sub.add_parser("lowerbound", parents=[common], help="scalar lower-bound experiment")
    s.add_argument("--n-min", type=int, default=1, dest="n_min")
    s.add_argument("--n-max", type=int, default=5, dest="n_max")
    s.add_argument("--charpoly-max-n", type=int, default=9, dest="charpoly_max_n")
    s.add_argument("--no-timing", action="store_true", dest="no_timing",
                   help="leave the timing column empty for byte-identical reports")
    s.set_defaults(func=cmd_lowerbound)
    return p


_PARSE_ERRORS = (FormulaSyntaxError, json.JSONDecodeError, circ.CircuitError, ValueError)
_SEMANTIC_ERRORS = (
    circ.InadmissiblePoint, ArityMismatch, UndeclaredSymbol, ModeError, SchemaError,
    SizeLimitExceeded, NotMonic, NotHomogeneous, DegreeMismatch, DuplicatePoints, NotPolynomial,
    UnboundSchemaSymbol, UnknownSymbol, MissingAssignment, RingMismatch, ZeroDivisionError,
    QueryEvaluationError, NoEquivalentPairs,
)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        return a.func(a)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except _SEMANTIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _PARSE_ERRORS as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
