"""Exact arithmetic kernel: rationals, polynomials, rational functions, matrices."""

from .matrix import (
    Matrix,
    NonSquare,
    charpoly,
    charpoly_coeffs,
    det,
    det_bareiss,
    rank_exact,
    vandermonde_det,
    vandermonde_matrix,
)
from .polynomial import Polynomial, UnknownSymbol, poly_var, poly_vars
from .rational import format_rational, is_rational, parse_rational, qnorm
from .ratfunc import RationalFunction
from .rings import (
    QQ,
    GaussianField,
    GaussianRational,
    MatrixRing,
    MissingAssignment,
    PolynomialRing,
    RationalField,
    RationalFunctionField,
    Ring,
    RingMismatch,
    poly_eval_generic,
)

from .roots import rational_roots

def coeffs_in(p: Polynomial, var: str):
    """Coefficients of ``p`` as a polynomial in ``var``, lowest degree first."""
    return p.coeffs_in(var)


__all__ = [
    "Matrix", "NonSquare", "charpoly", "charpoly_coeffs", "det", "det_bareiss",
    "rank_exact", "vandermonde_det", "vandermonde_matrix", "Polynomial",
    "UnknownSymbol", "poly_var", "poly_vars", "format_rational", "is_rational",
    "parse_rational", "qnorm", "RationalFunction", "QQ", "GaussianField",
    "GaussianRational", "MatrixRing", "MissingAssignment", "PolynomialRing",
    "RationalField", "RationalFunctionField", "Ring", "RingMismatch",
    "poly_eval_generic", "coeffs_in", "rational_roots",
]
