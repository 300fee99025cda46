"""The Gram matrix of shifted monomials on a symmetric interval and its relatives.

All row/column indices in this module are 1-based, matching the usual
written form ``entry(r, s) = [eps**(r+s-1) - (-eps)**(r+s-1)] / (r+s-1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Sequence

from . import linalg
from .scalar import Mode, mode_of, to_mode


@dataclass(frozen=True)
class MomentMatrix:
    order: int
    epsilon: Any
    entries: tuple
    normalized: bool = False

    def entry(self, r: int, s: int):
        return self.entries[r - 1][s - 1]

    def rows(self) -> list:
        return [list(row) for row in self.entries]

    @property
    def k(self) -> int:
        return self.order - 1


@dataclass(frozen=True)
class CauchySpec:
    """``D(i, t)``: the ``(t+1) x (t+1)`` matrix ``1 / (i + 2(p+q-2))``."""

    i: int
    t: int

    def __post_init__(self):
        if self.i < 1 or self.t < 0:
            raise ValueError(f"need i >= 1 and t >= 0, got i={self.i}, t={self.t}")

    @property
    def size(self) -> int:
        return self.t + 1

    def a(self, p: int) -> int:
        return self.i + 2 * (p - 1)

    def b(self, q: int) -> int:
        return 2 * (q - 1)

    def matrix(self) -> list:
        n = self.size
        return [[Fraction(1, self.a(p) + self.b(q)) for q in range(1, n + 1)]
                for p in range(1, n + 1)]


@dataclass(frozen=True)
class BlockShape:
    u: int
    v: int
    permutation: tuple

    def index(self, p: int) -> int:
        """Original row/column of permuted position ``p``."""
        return self.permutation[p - 1]


def _check_positive(eps):
    if not eps > 0:
        raise ValueError(f"epsilon must be positive, got {eps!r}")


def _raw_entry(n: int, eps):
    return (eps ** n - (-eps) ** n) / n


def build_moment(k: int, eps) -> MomentMatrix:
    """``A_{k+1}``: Gram matrix of ``1, (x-x0), ..., (x-x0)**k`` on ``[x0-eps, x0+eps]``.

    Works for any ordered field element ``eps`` (including sympy symbols
    declared positive).
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    _check_positive(eps)
    n = k + 1
    entries = tuple(tuple(_raw_entry(r + s - 1, eps) for s in range(1, n + 1))
                    for r in range(1, n + 1))
    return MomentMatrix(n, eps, entries)


@lru_cache(maxsize=None)
def _normalized_entries(n: int) -> tuple:
    return tuple(tuple(Fraction(1 - (-1) ** (r + s - 1), 2 * (r + s - 1))
                       for s in range(1, n + 1)) for r in range(1, n + 1))


def normalize(A: MomentMatrix) -> MomentMatrix:
    """The ``eps``-free matrix with entries ``(1 - (-1)**(r+s-1)) / (2(r+s-1))``."""
    return MomentMatrix(A.order, 1, _normalized_entries(A.order), normalized=True)


def normalized_moment(k: int) -> MomentMatrix:
    return MomentMatrix(k + 1, 1, _normalized_entries(k + 1), normalized=True)


def det_direct(A: MomentMatrix):
    """Determinant of the stored entries (rational: fraction-free elimination)."""
    rows = A.rows()
    if mode_of(*(x for row in rows for x in row)) is Mode.RATIONAL:
        return linalg.rational_det(rows)
    return linalg.gauss_det(rows)


def det_via_factorization(k: int, eps):
    """``2**(k+1) * eps**((k+1)**2) * det(normalized)``."""
    _check_positive(eps)
    dn = linalg.rational_det(normalized_moment(k).rows())
    mode = mode_of(eps)
    if isinstance(eps, int):
        mode = Mode.RATIONAL
    return 2 ** (k + 1) * to_mode(eps, mode) ** ((k + 1) ** 2) * to_mode(dn, mode)


def block_shape(k: int) -> BlockShape:
    if k < 0:
        raise ValueError("k must be non-negative")
    if k % 2 == 0:
        u, v = k // 2, k // 2 + 1
    else:
        u = v = (k + 1) // 2
    perm = tuple(range(2, 2 * u + 1, 2)) + tuple(range(1, 2 * v, 2))
    return BlockShape(u, v, perm)


def permuted_entry(M: MomentMatrix, shape: BlockShape, p: int, q: int):
    """Entry ``(p, q)`` of the row-and-column permuted matrix, by index remapping."""
    return M.entry(shape.index(p), shape.index(q))


def block_decompose(k: int):
    """Split the normalized matrix into the even-index and odd-index blocks.

    Returns ``(shape, B, C)`` where ``B`` is ``u x u`` (rows/columns
    2, 4, ..., 2u) and ``C`` is ``v x v`` (rows/columns 1, 3, ..., 2v-1).
    """
    shape = block_shape(k)
    At = normalized_moment(k)
    u, v = shape.u, shape.v
    B = [[permuted_entry(At, shape, p, q) for q in range(1, u + 1)]
         for p in range(1, u + 1)]
    C = [[permuted_entry(At, shape, u + p, u + q) for q in range(1, v + 1)]
         for p in range(1, v + 1)]
    return shape, B, C


def det_via_blocks(k: int, eps):
    """``2**(k+1) * eps**((k+1)**2) * det(B) * det(C)``."""
    _, B, C = block_decompose(k)
    prod = linalg.rational_det(B) * linalg.rational_det(C)
    mode = Mode.RATIONAL if isinstance(eps, int) else mode_of(eps)
    return 2 ** (k + 1) * to_mode(eps, mode) ** ((k + 1) ** 2) * to_mode(prod, mode)


def cauchy_det_closed_form(spec: CauchySpec) -> Fraction:
    """Cauchy determinant product formula with ``a_p = i + 2(p-1)``, ``b_q = 2(q-1)``."""
    n = spec.size
    num = 1
    for p in range(1, n + 1):
        for q in range(p + 1, n + 1):
            num *= (spec.a(p) - spec.a(q)) * (spec.b(p) - spec.b(q))
    den = 1
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            den *= spec.a(p) + spec.b(q)
    return Fraction(num, den)


def cauchy_det_elimination(spec: CauchySpec) -> Fraction:
    """Exact determinant of ``D(i, t)`` by fraction-free elimination."""
    return linalg.rational_det(spec.matrix())


def cauchy_det_reduction(spec: CauchySpec) -> Fraction:
    """Determinant of ``D(i, t)`` through the reduction ``D(i, t) -> D(i+4, t-1)``.

    Scaling row ``j`` and then columns ``j >= 2`` by ``i + 2(j-1)``,
    clearing the first column and pulling ``4p`` out of row ``p`` and ``q``
    out of column ``q`` of the remaining block gives

        det D(i, t) * prod_{j=1}^{t+1} (i+2j-2) * prod_{j=2}^{t+1} (i+2j-2)
            = 4**t * (t!)**2 * det D(i+4, t-1).
    """
    i, t = spec.i, spec.t
    factor = Fraction(1)
    while t > 0:
        rows = math.prod(i + 2 * j - 2 for j in range(1, t + 2))
        cols = math.prod(i + 2 * j - 2 for j in range(2, t + 2))
        factor *= Fraction(4 ** t * math.factorial(t) ** 2, rows * cols)
        i, t = i + 4, t - 1
    return factor * Fraction(1, i)


@lru_cache(maxsize=None)
def alpha_table(k: int) -> tuple:
    """``eps``-free coefficients of the inverse: ``inv(A)[r][s] = alpha[r][s] / eps**(r+s-1)``.

    Since ``A = 2 * eps * D * normalized * D`` with ``D = diag(eps**(r-1))``,
    ``alpha`` is half the inverse of the normalized matrix.
    """
    inv = linalg.inverse(normalized_moment(k).rows())
    return tuple(tuple(x / 2 for x in row) for row in inv)


@dataclass(frozen=True)
class InverseStructure:
    k: int
    epsilons: tuple
    alpha: tuple
    tables: tuple
    parity_zero: bool
    consistent: bool
    max_deviation: Any


def inverse_structure(k: int, eps_list: Sequence[Any], rtol: float = 1e-9) -> InverseStructure:
    """Invert ``A_{k+1}`` at each ``eps`` and scale out ``eps**(r+s-1)``.

    ``consistent`` certifies that the scaled tables coincide across all
    ``eps`` (exactly for rationals, to ``rtol`` otherwise); ``parity_zero``
    certifies ``alpha[r][s] == 0`` whenever ``r+s`` is odd.
    """
    eps_list = tuple(eps_list)
    if len(set(eps_list)) < 2:
        raise ValueError("need at least two distinct epsilon values")
    n = k + 1
    tables = []
    for eps in eps_list:
        if isinstance(eps, int):
            eps = Fraction(eps)
        inv = linalg.inverse(build_moment(k, eps).rows())
        tables.append(tuple(tuple(inv[r][s] * eps ** (r + s + 1) for s in range(n))
                            for r in range(n)))
    ref = tables[0]
    exact = all(isinstance(x, Fraction) for t in tables for row in t for x in row)
    dev = 0
    for t in tables[1:]:
        for r in range(n):
            for s in range(n):
                d = abs(t[r][s] - ref[r][s])
                if not exact:
                    d = d / max(abs(ref[r][s]), 1)
                dev = max(dev, d)
    consistent = dev == 0 if exact else dev <= rtol
    parity_zero = all(t[r][s] == 0 for t in tables for r in range(n) for s in range(n)
                      if (r + s) % 2 == 1)
    return InverseStructure(k, eps_list, ref, tuple(tables), parity_zero, consistent, dev)
