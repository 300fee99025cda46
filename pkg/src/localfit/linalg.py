"""Small dense linear algebra over any Python number field.

Matrices are lists of rows. Everything here is written for the tiny
structured systems of this package (order <= ~13) and works unchanged for
``Fraction``, ``float`` and ``mpmath.mpf`` entries.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Any, Sequence

Matrix = Sequence[Sequence[Any]]


class SingularMatrixError(ArithmeticError):
    pass


class PivotBreakdown(ArithmeticError):
    """A symmetric factorization met a pivot at or below its threshold."""

    def __init__(self, message: str, index: int, pivot: Any):
        super().__init__(message)
        self.index = index
        self.pivot = pivot


def bareiss_det(matrix: Matrix) -> int:
    """Determinant of an integer matrix by fraction-free elimination.

    Every intermediate value is an integer (Sylvester's identity makes the
    division exact).
    """
    a = [[int(x) for x in row] for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
        prev = pivot
    return sign * a[n - 1][n - 1]


def rational_det(matrix: Matrix) -> Fraction:
    """Exact determinant of a rational matrix.

    Each row is scaled to integers by the lcm of its denominators, the
    integer determinant is taken with :func:`bareiss_det`, and the scale is
    divided back out.
    """
    rows = [[Fraction(x) for x in row] for row in matrix]
    scale = 1
    int_rows = []
    for row in rows:
        lcm = math.lcm(*(x.denominator for x in row)) if row else 1
        scale *= lcm
        int_rows.append([x.numerator * (lcm // x.denominator) for x in row])
    return Fraction(bareiss_det(int_rows), scale)


def gauss_det(matrix: Matrix) -> Any:
    """Determinant by ordinary Gaussian elimination with partial pivoting."""
    a = [list(row) for row in matrix]
    n = len(a)
    det = 1
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(a[r][k]))
        if a[p][k] == 0:
            return a[p][k] * 0
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det = det * a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            for j in range(k + 1, n):
                a[i][j] = a[i][j] - f * a[k][j]
    return det


def ldl_factor(matrix: Matrix, threshold: Any = 0):
    """Symmetric ``L D L^T`` factorization without pivoting.

    Returns ``(L, d)`` with unit lower-triangular ``L``. Raises
    :class:`PivotBreakdown` when a pivot is ``<= threshold``; for a positive
    definite matrix all pivots are positive.
    """
    n = len(matrix)
    L = [[matrix[0][0] * 0 for _ in range(n)] for _ in range(n)]
    d = []
    for j in range(n):
        s = matrix[j][j]
        for k in range(j):
            s = s - L[j][k] * L[j][k] * d[k]
        if not s > threshold:
            raise PivotBreakdown(f"pivot {j + 1} is {s}", j + 1, s)
        d.append(s)
        L[j][j] = s / s
        for i in range(j + 1, n):
            t = matrix[i][j]
            for k in range(j):
                t = t - L[i][k] * L[j][k] * d[k]
            L[i][j] = t / s
    return L, d


def ldl_solve(matrix: Matrix, rhs: Sequence[Any], threshold: Any = 0):
    """Solve a symmetric positive definite system; returns ``(x, min_pivot)``."""
    L, d = ldl_factor(matrix, threshold)
    n = len(rhs)
    z = list(rhs)
    for i in range(n):
        for k in range(i):
            z[i] = z[i] - L[i][k] * z[k]
    y = [z[i] / d[i] for i in range(n)]
    for i in reversed(range(n)):
        for k in range(i + 1, n):
            y[i] = y[i] - L[k][i] * y[k]
    return y, min(d)


def solve(matrix: Matrix, rhs: Sequence[Any]) -> list:
    """General square solve by Gaussian elimination with partial pivoting."""
    n = len(rhs)
    a = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(a[r][k]))
        if a[p][k] == 0:
            raise SingularMatrixError(f"singular matrix at column {k + 1}")
        a[k], a[p] = a[p], a[k]
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            for j in range(k, n + 1):
                a[i][j] = a[i][j] - f * a[k][j]
    x = [None] * n
    for i in reversed(range(n)):
        s = a[i][n]
        for j in range(i + 1, n):
            s = s - a[i][j] * x[j]
        x[i] = s / a[i][i]
    return x


def inverse(matrix: Matrix) -> list:
    """Gauss-Jordan inverse with partial pivoting."""
    n = len(matrix)
    zero = matrix[0][0] * 0
    one = zero + 1
    a = [list(row) + [one if i == j else zero for j in range(n)]
         for i, row in enumerate(matrix)]
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(a[r][k]))
        if a[p][k] == 0:
            raise SingularMatrixError(f"singular matrix at column {k + 1}")
        a[k], a[p] = a[p], a[k]
        piv = a[k][k]
        a[k] = [x / piv for x in a[k]]
        for i in range(n):
            if i != k and a[i][k] != 0:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return [row[n:] for row in a]


def leading_minors(matrix: Matrix) -> list:
    """Exact leading principal minors of a rational matrix."""
    return [rational_det([row[:m] for row in matrix[:m]])
            for m in range(1, len(matrix) + 1)]


def matmul(a: Matrix, b: Matrix) -> list:
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), a[0][0] * 0)
             for j in range(len(b[0]))] for i in range(len(a))]


def matvec(a: Matrix, x: Sequence[Any]) -> list:
    return [sum((a[i][k] * x[k] for k in range(len(x))), a[0][0] * 0)
            for i in range(len(a))]
