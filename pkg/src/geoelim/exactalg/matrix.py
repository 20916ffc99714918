"""Dense matrices over commutative rings with division-free determinants.

Entries may be rationals, :class:`Polynomial` or :class:`RationalFunction`
values; zero tests use truthiness so sparse structure (e.g. multiplication
matrices with one nonzero per column) is skipped cheaply.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Callable, List, Sequence

from .polynomial import Polynomial
from .rational import is_rational, qnorm


class NonSquare(ValueError):
    """Operation needs a square matrix."""


class Matrix:
    """Immutable row-major matrix."""

    __slots__ = ("rows", "cols", "entries", "zero")

    def __init__(self, rows: int, cols: int, entries: Sequence, zero=None):
        entries = tuple(entries)
        if rows * cols != len(entries):
            raise ValueError(f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}")
        self.rows = rows
        self.cols = cols
        self.entries = entries
        if zero is None:
            zero = entries[0] * 0 if entries else 0
        self.zero = zero

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], zero=None) -> "Matrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        flat = [qnorm(x) if is_rational(x) else x for r in rows for x in r]
        return cls(len(rows), ncols, flat, zero)

    @classmethod
    def identity(cls, n: int, one=1, zero=0) -> "Matrix":
        entries = [zero] * (n * n)
        for i in range(n):
            entries[i * n + i] = one
        return cls(n, n, entries, zero)

    @classmethod
    def zeros(cls, rows: int, cols: int, zero=0) -> "Matrix":
        return cls(rows, cols, [zero] * (rows * cols), zero)

    @classmethod
    def diag(cls, values: Sequence, zero=0) -> "Matrix":
        n = len(values)
        entries = [zero] * (n * n)
        for i, v in enumerate(values):
            entries[i * n + i] = v
        return cls(n, n, entries, zero)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple:
        return self.entries[j::self.cols]

    def tolist(self) -> List[list]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "Matrix":
        return Matrix(self.cols, self.rows,
                      [self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)],
                      self.zero)

    def map(self, f: Callable, zero=None) -> "Matrix":
        z = f(self.zero) if zero is None else zero
        cache = {}
        out = []
        for x in self.entries:
            if not x:
                out.append(z)
            elif is_rational(x):
                if x not in cache:
                    cache[x] = f(x)
                out.append(cache[x])
            else:
                out.append(f(x))
        return Matrix(self.rows, self.cols, out, z)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix(len(rows), len(cols),
                      [self.entries[i * self.cols + j] for i in rows for j in cols], self.zero)

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(a == b for a, b in zip(self.entries, other.entries))

    __hash__ = None

    def _same_shape(self, other: "Matrix"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        self._same_shape(other)
        out = []
        for a, b in zip(self.entries, other.entries):
            if not b:
                out.append(a)
            elif not a:
                out.append(b)
            else:
                out.append(a + b)
        return Matrix(self.rows, self.cols, out, self.zero)

    def __neg__(self) -> "Matrix":
        return Matrix(self.rows, self.cols, [(-a if a else a) for a in self.entries], self.zero)

    def __sub__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "Matrix":
        if not c:
            return Matrix.zeros(self.rows, self.cols, self.zero)
        if c == 1:
            return self
        return Matrix(self.rows, self.cols, [(a * c if a else a) for a in self.entries], self.zero)

    def __mul__(self, other):
        if isinstance(other, Matrix):
            return self.matmul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def _nonzero_rows(self):
        c = self.cols
        e = self.entries
        return [[(j, e[i * c + j]) for j in range(c) if e[i * c + j]] for i in range(self.rows)]

    def matmul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        zero = self.zero
        brows = other._nonzero_rows()
        out = []
        for arow in self._nonzero_rows():
            acc = {}
            for k, a in arow:
                for j, b in brows[k]:
                    t = a * b
                    acc[j] = acc[j] + t if j in acc else t
            out.extend(acc.get(j, zero) or zero for j in range(other.cols))
        return Matrix(self.rows, other.cols, out, zero)

    def is_lower_triangular(self) -> bool:
        c = self.cols
        e = self.entries
        return all(not e[i * c + j] for i in range(self.rows) for j in range(i + 1, c))

    def is_upper_triangular(self) -> bool:
        c = self.cols
        e = self.entries
        return all(not e[i * c + j] for i in range(self.rows) for j in range(min(i, c)))

    def diagonal(self) -> tuple:
        return tuple(self.entries[i * self.cols + i] for i in range(min(self.rows, self.cols)))

    def __repr__(self) -> str:
        return f"Matrix({self.tolist()!r})"


def _ring_one(zero):
    return zero + 1


def _berkowitz(M: Matrix) -> list:
    """Coefficients ``[1, c1, ..., cN]`` of ``det(yI - M)`` (highest first)."""
    n = M.rows
    zero = M.zero
    one = _ring_one(zero)
    if n == 0:
        return [one]
    A = M.tolist()
    # bottom-right (k+1)x(k+1) leading blocks are handled in order k = 0..n-1
    poly = [one, -A[0][0]]
    for k in range(1, n):
        # block [[a, R], [C, B]] with B the top-left k x k part
        R = [-A[k][j] for j in range(k)]
        C = [A[i][k] for i in range(k)]
        a = -A[k][k]
        items = [C]
        for _ in range(k - 1):
            prev = items[-1]
            items.append([_dot(A[i][:k], prev, zero) for i in range(k)])
        col = [one, a] + [_dot(R, vec, zero) for vec in items]
        # Toeplitz (k+2) x (k+1) lower-triangular matrix times poly
        new = []
        for i in range(k + 2):
            s = zero
            for j in range(min(i, k) + 1):
                t = col[i - j]
                p = poly[j]
                if t and p:
                    s = s + t * p
            new.append(s)
        poly = new
    return poly


def _dot(xs, ys, zero):
    s = zero
    for x, y in zip(xs, ys):
        if x and y:
            s = s + x * y
    return s


def _triangular_coeffs(diag: Sequence, zero) -> list:
    one = _ring_one(zero)
    coeffs = [one]
    for d in diag:
        nxt = coeffs + [zero]
        if d:
            for k in range(len(coeffs), 0, -1):
                c = coeffs[k - 1]
                if c:
                    nxt[k] = nxt[k] - d * c
        coeffs = nxt
    return coeffs


def charpoly_coeffs(M: Matrix, method: str = "auto") -> list:
    """``[1, c1, ..., cN]`` with ``det(yI - M) = sum c_i y^(N-i)``.

    ``method`` is ``"berkowitz"`` (general, division-free) or ``"auto"``,
    which first takes the product of diagonal factors for triangular input.
    """
    if not M.is_square():
        raise NonSquare(f"charpoly of a {M.rows}x{M.cols} matrix")
    if method not in ("auto", "berkowitz"):
        raise ValueError(f"unknown charpoly method {method!r}")
    if method == "auto" and (M.is_lower_triangular() or M.is_upper_triangular()):
        return _triangular_coeffs(M.diagonal(), M.zero)
    return _berkowitz(M)


def charpoly(M: Matrix, var: str = "y", method: str = "auto") -> Polynomial:
    """``det(var*I - M)`` as a polynomial; entries must be rational or Polynomial."""
    coeffs = charpoly_coeffs(M, method)
    N = len(coeffs) - 1
    y = Polynomial.var(var)
    result = Polynomial.zero((var,))
    for i, c in enumerate(coeffs):
        if not c:
            continue
        if not isinstance(c, Polynomial):
            if not is_rational(c):
                raise TypeError("charpoly needs rational or polynomial entries")
            c = Polynomial.const(c)
        if var in c.used_variables():
            raise ValueError(f"entries already use the variable {var!r}")
        result = result + c * y ** (N - i)
    return result


def det(M: Matrix, method: str = "auto"):
    """Determinant through the characteristic polynomial, ``(-1)^N * c_N``."""
    if not M.is_square():
        raise NonSquare(f"det of a {M.rows}x{M.cols} matrix")
    if M.rows == 0:
        return _ring_one(M.zero)
    if method == "auto" and (M.is_lower_triangular() or M.is_upper_triangular()):
        out = _ring_one(M.zero)
        for d in M.diagonal():
            if not d:
                return M.zero
            out = out * d
        return out
    c = charpoly_coeffs(M, "berkowitz")[-1]
    return c if M.rows % 2 == 0 else -c


def _integer_rows(M: Matrix) -> List[List[int]]:
    rows = []
    for i in range(M.rows):
        r = [Fraction(x) for x in M.row(i)]
        lcm = 1
        for x in r:
            lcm = lcm * x.denominator // gcd(lcm, x.denominator)
        rows.append([int(x * lcm) for x in r])
    return rows


def bareiss_echelon(rows: List[List[int]]):
    """Fraction-free elimination on an integer matrix; returns (rank, last pivot, sign)."""
    A = [list(r) for r in rows]
    m = len(A)
    n = len(A[0]) if A else 0
    prev = 1
    rank = 0
    sign = 1
    for col in range(n):
        if rank == m:
            break
        piv = next((r for r in range(rank, m) if A[r][col]), None)
        if piv is None:
            continue
        if piv != rank:
            A[rank], A[piv] = A[piv], A[rank]
            sign = -sign
        p = A[rank][col]
        for r in range(rank + 1, m):
            a = A[r][col]
            for c in range(col + 1, n):
                A[r][c] = (p * A[r][c] - a * A[rank][c]) // prev
            A[r][col] = 0
        prev = p
        rank += 1
    return rank, prev, sign


def rank_exact(M: Matrix) -> int:
    """Row rank of a rational matrix by Bareiss elimination."""
    if M.rows == 0 or M.cols == 0:
        return 0
    for x in M.entries:
        if not is_rational(x):
            raise TypeError("rank_exact needs rational entries")
    return bareiss_echelon(_integer_rows(M))[0]


def det_bareiss(M: Matrix):
    """Determinant of a rational matrix by fraction-free elimination."""
    if not M.is_square():
        raise NonSquare("det of a non-square matrix")
    if M.rows == 0:
        return 1
    rows = [[Fraction(x) for x in M.row(i)] for i in range(M.rows)]
    scale = Fraction(1)
    int_rows = []
    for r in rows:
        lcm = 1
        for x in r:
            lcm = lcm * x.denominator // gcd(lcm, x.denominator)
        scale /= lcm
        int_rows.append([int(x * lcm) for x in r])
    rank, last, sign = bareiss_echelon(int_rows)
    if rank < M.rows:
        return 0
    return qnorm(sign * last * scale)


def vandermonde_matrix(points: Sequence) -> Matrix:
    pts = [qnorm(p) for p in points]
    n = len(pts)
    return Matrix(n, n, [qnorm(p ** j) for p in pts for j in range(n)], 0)


def vandermonde_det(points: Sequence):
    """Exact ``det(points[i]**j)``, cross-checked against the product formula."""
    pts = [qnorm(p) for p in points]
    if not pts:
        raise ValueError("vandermonde_det needs at least one point")
    value = det(vandermonde_matrix(pts))
    closed = 1
    for i in range(len(pts)):
        for k in range(i + 1, len(pts)):
            closed *= pts[k] - pts[i]
    closed = qnorm(closed)
    if value != closed:
        raise ArithmeticError(f"Vandermonde determinant {value} != closed form {closed}")
    return value
