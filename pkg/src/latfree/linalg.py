"""Exact Gaussian elimination over :class:`~latfree.scalar.FieldScalar`."""

from __future__ import annotations

from .scalar import FieldScalar, as_scalar


class SingularMatrixError(ArithmeticError):
    """Raised when elimination finds no pivot; ``step`` is the failing column."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"matrix is singular (no pivot in column {step})")


def _matrix(rows):
    return [[as_scalar(x) for x in row] for row in rows]


def solve_exact(matrix, rhs):
    """Solve ``matrix @ x = rhs`` exactly for a square nonsingular matrix.

    Pivots are chosen as the first nonzero entry in each column; over an exact
    field no numeric pivoting is needed.
    """
    m = _matrix(matrix)
    b = [as_scalar(x) for x in rhs]
    n = len(m)
    if any(len(row) != n for row in m) or len(b) != n:
        raise ValueError("solve_exact needs a square system")
    for col in range(n):
        piv = next((r for r in range(col, n) if not m[r][col].is_zero()), None)
        if piv is None:
            raise SingularMatrixError(col)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            b[col], b[piv] = b[piv], b[col]
        inv = m[col][col].inverse()
        for r in range(col + 1, n):
            if m[r][col].is_zero():
                continue
            f = m[r][col] * inv
            row_r, row_c = m[r], m[col]
            for c in range(col + 1, n):
                if not row_c[c].is_zero():
                    row_r[c] = row_r[c] - f * row_c[c]
            row_r[col] = FieldScalar(0)
            b[r] = b[r] - f * b[col]
    x = [FieldScalar(0)] * n
    for r in reversed(range(n)):
        acc = b[r]
        for c in range(r + 1, n):
            if not m[r][c].is_zero():
                acc = acc - m[r][c] * x[c]
        x[r] = acc / m[r][r]
    return x


def solve_consistent(matrix, rhs):
    """Solve a possibly overdetermined system that must have a unique solution.

    Raises :class:`SingularMatrixError` when the solution is not unique and
    ``ValueError`` when the system is inconsistent.
    """
    m = _matrix(matrix)
    b = [as_scalar(x) for x in rhs]
    rows = len(m)
    cols = len(m[0]) if m else 0
    r = 0
    for col in range(cols):
        piv = next((i for i in range(r, rows) if not m[i][col].is_zero()), None)
        if piv is None:
            raise SingularMatrixError(col)
        m[r], m[piv] = m[piv], m[r]
        b[r], b[piv] = b[piv], b[r]
        inv = m[r][col].inverse()
        m[r] = [x * inv for x in m[r]]
        b[r] = b[r] * inv
        for i in range(rows):
            if i != r and not m[i][col].is_zero():
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
                b[i] = b[i] - f * b[r]
        r += 1
    for i in range(r, rows):
        if not b[i].is_zero():
            raise ValueError(f"inconsistent system (row {i} reduces to 0 = {b[i]})")
    return b[:cols]


def determinant(matrix):
    m = _matrix(matrix)
    n = len(m)
    det = FieldScalar(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if not m[r][col].is_zero()), None)
        if piv is None:
            return FieldScalar(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det = det * m[col][col]
        inv = m[col][col].inverse()
        for r in range(col + 1, n):
            if not m[r][col].is_zero():
                f = m[r][col] * inv
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return det


def hyperplane_normal(points):
    """Normal of the affine hull of ``d`` points in R^d by cofactor expansion.

    Entry ``i`` is ``(-1)**i`` times the minor of the edge matrix with column
    ``i`` removed, so ``<normal, p - points[0]> = 0`` for every input point.
    """
    base = [as_scalar(x) for x in points[0]]
    edges = [[as_scalar(x) - y for x, y in zip(p, base)] for p in points[1:]]
    d = len(base)
    normal = []
    for i in range(d):
        minor = [row[:i] + row[i + 1:] for row in edges]
        det = determinant(minor) if minor else FieldScalar(1)
        normal.append(det if i % 2 == 0 else -det)
    return normal


def dot(u, v):
    acc = FieldScalar(0)
    for x, y in zip(u, v):
        if x:
            acc = acc + y * x
    return acc
