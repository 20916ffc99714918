"""FO(+, *, =, <, 0, 1) formulas with schema relation and function symbols."""

from .ast import (
    FALSE, ORDER_RELOPS, RELOPS, TRUE, And, Atom, Exists, Forall, Formula, Iff, Implies,
    Not, Or, RelApp, Truth, conj, disj, is_quantifier_free, render,
)
from .logic import (
    CaptureDetected, FreeSymbols, PrenexInfo, UnboundSchemaSymbol, cube_points,
    eval_finite, eval_finite_exists, eval_qf, free_symbols, map_atoms, prenex,
    substitute_schema, substitute_symbols,
)
from .parser import (
    ArityMismatch, Context, FormulaSyntaxError, ModeError, UndeclaredSymbol, parse,
    parse_term, tokenize,
)
from .terms import (
    PARAM, VAR, Add, Const, FuncApp, Mul, Neg, Pow, Sub, Sym, Term, eval_term,
    poly_to_term, render_term, term_to_poly,
)
