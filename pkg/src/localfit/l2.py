"""Best L2 polynomial approximation on ``[x0-eps, x0+eps]``.

Two independent routes produce the same polynomial:

* ``normal_equations`` -- the stationarity system of the squared error,
  solved in the scaled variable ``t = (x-x0)/eps`` where the matrix is the
  ``eps``-free normalized moment matrix (times 2);
* ``legendre_projection`` -- orthogonal projection onto Legendre
  polynomials in ``t``, re-expanded in the shifted monomial basis.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any

import numpy as np

from . import linalg
from .moment import alpha_table, normalized_moment
from .poly import FunctionSpec, Polynomial, SmoothnessError, eval_poly, sample_remainder_bound
from .quadrature import (MAX_NODES, QuadratureWarning, gauss_legendre_rule, integrate_moment_exact,
                         refinement_tolerance, scaled_integrals, scaled_moments)
from .scalar import Mode, ModeError, exact, machine_epsilon, resolve_mode, sqrt, to_mode

FLOAT_DEGREE_CAP = 12
NORMAL = "normal_equations"
LEGENDRE = "legendre_projection"
METHODS = (NORMAL, LEGENDRE)


class ConditioningError(ArithmeticError):
    """The normal-equation factorization hit a pivot below threshold."""

    def __init__(self, message: str, k: int, eps, pivot):
        super().__init__(message)
        self.k = k
        self.eps = eps
        self.pivot = pivot


@dataclass(frozen=True)
class ApproxResult:
    poly: Polynomial
    epsilon: Any
    method: str
    residual_l2: Any
    pivot_min: Any = None

    @property
    def coefficients(self) -> tuple:
        return self.poly.coeffs


def _check_problem(f: FunctionSpec, x0, eps, k: int, mode: Mode):
    if not eps > 0:
        raise ValueError(f"epsilon must be positive, got {eps!r}")
    if k < 0:
        raise ValueError("degree must be non-negative")
    if not f.contains(x0 - eps, x0 + eps):
        raise ValueError(f"[x0-eps, x0+eps] = [{x0 - eps}, {x0 + eps}] is outside "
                         f"the domain {f.domain} of {f.name}")
    if k > f.smoothness:
        raise SmoothnessError(f"{f.name}: degree {k} exceeds declared smoothness n={f.smoothness}")
    if mode is Mode.FLOAT and k > FLOAT_DEGREE_CAP:
        raise ValueError(f"degree {k} exceeds the floating-mode cap of {FLOAT_DEGREE_CAP}")
    if mode is Mode.RATIONAL and f.polynomial is None:
        raise ModeError(f"{f.name}: rational mode is only available for polynomial functions")


def _prepare(f, x0, eps, k, mode):
    mode = resolve_mode(mode, x0, eps)
    x0, eps = to_mode(x0, mode), to_mode(eps, mode)
    _check_problem(f, x0, eps, k, mode)
    return x0, eps, mode


def _exact_scaled_moments(f: FunctionSpec, x0, eps, count: int) -> list:
    return [integrate_moment_exact(f.polynomial, x0, eps, j) / eps ** (j + 1)
            for j in range(count)]


def l2_objective(f: FunctionSpec, p: Polynomial, x0, eps, mode=None, m: int | None = None):
    """``J = int (f - p)**2`` over ``[x0-eps, x0+eps]`` (exact in rational mode)."""
    mode = resolve_mode(mode, x0, eps)
    x0, eps = to_mode(x0, mode), to_mode(eps, mode)
    if not f.contains(x0 - eps, x0 + eps):
        raise ValueError(f"[x0-eps, x0+eps] is outside the domain of {f.name}")
    if mode is Mode.RATIONAL:
        if f.polynomial is None:
            raise ModeError(f"{f.name}: rational mode is only available for polynomial functions")
        fp = f.polynomial.recenter(x0)
        pp = p.recenter(x0)
        n = max(fp.degree, pp.degree)
        d = [Fraction(fp.padded(n).coeffs[i]) - Fraction(pp.padded(n).coeffs[i])
             for i in range(n + 1)]
        total = Fraction(0)
        for i, a in enumerate(d):
            for j, b in enumerate(d):
                if (i + j) % 2 == 0:
                    total += a * b * 2 * eps ** (i + j + 1) / (i + j + 1)
        return total
    return eps * _residual_integral(f, p, x0, eps, mode, m or 16)


def _residual_integral(f, p, x0, eps, mode, m):
    """``int_{-1}^{1} (f - p)**2 dt`` with node doubling.

    Successive rules must agree to the refinement tolerance, or to within the rounding
    noise of ``f - p`` itself (``ulp * |r| * (|f| + |p|)`` integrated).
    """
    def once(n):
        rule = gauss_legendre_rule(n, mode)
        xs = [x0 + eps * t for t in rule.nodes]
        if mode is Mode.FLOAT:
            fx = f.eval_many(xs)
            px = eval_poly(p, np.array(xs))
            r = fx - px
            w = np.array(rule.weights)
            return float(w @ (r * r)), float(w @ (np.abs(r) * (np.abs(fx) + np.abs(px))))
        total = scale = to_mode(0, mode)
        for x, w in zip(xs, rule.weights):
            fx, px = to_mode(f(x), mode), eval_poly(p, x)
            r = fx - px
            total = total + w * r * r
            scale = scale + w * abs(r) * (abs(fx) + abs(px))
        return total, scale

    ulp = machine_epsilon(mode)
    tol = refinement_tolerance(mode)
    prev, _ = once(m)
    while 2 * m <= MAX_NODES:
        m *= 2
        cur, scale = once(m)
        if abs(cur - prev) <= tol * abs(cur) + 64 * ulp * scale:
            return cur
        prev = cur
    warnings.warn(f"{f.name}: residual quadrature with eps={eps} not converged at {m} nodes",
                  QuadratureWarning, stacklevel=3)
    return prev


def l2_error(f: FunctionSpec, p: Polynomial, x0, eps, mode=None, m: int | None = None):
    """``||f - p||_2`` on ``[x0-eps, x0+eps]``."""
    mode = resolve_mode(mode, x0, eps)
    return sqrt(l2_objective(f, p, x0, eps, mode, m), mode)


def assemble_w(f: FunctionSpec, x0, eps, k: int, mode=None, m: int | None = None) -> list:
    """Right-hand side ``w_r = int f(x) (x-x0)**(r-1) dx``, ``r = 1..k+1``."""
    mode = resolve_mode(mode, x0, eps)
    x0, eps = to_mode(x0, mode), to_mode(eps, mode)
    if not f.contains(x0 - eps, x0 + eps):
        raise ValueError(f"[x0-eps, x0+eps] is outside the domain of {f.name}")
    if mode is Mode.RATIONAL:
        if f.polynomial is None:
            raise ModeError(f"{f.name}: rational mode is only available for polynomial functions")
        return [integrate_moment_exact(f.polynomial, x0, eps, j) for j in range(k + 1)]
    wt = scaled_moments(f, x0, eps, k, m, mode)
    return [eps ** (j + 1) * w for j, w in enumerate(wt)]


def _via_rationals(solver, f, x0, eps, k, mode) -> ApproxResult:
    """Solve an exact polynomial problem in rationals, then round to ``mode``.

    Sampling a polynomial in floating point at small ``eps`` loses its
    high-order terms to cancellation; the exact moments do not.
    """
    res = solver(f, exact(x0), exact(eps), k, Mode.RATIONAL)
    p = Polynomial(x0, tuple(to_mode(c, mode) for c in res.poly.coeffs))
    pivot = None if res.pivot_min is None else to_mode(res.pivot_min, mode)
    return ApproxResult(p, eps, res.method, to_mode(res.residual_l2, mode), pivot)


def _exact_polynomial(f: FunctionSpec, mode: Mode) -> bool:
    return mode is not Mode.RATIONAL and f.exact and f.polynomial is not None


def _finish(f, x0, eps, k, mode, y, method, pivot_min, m):
    coeffs = tuple(y[i] / eps ** i for i in range(k + 1))
    p = Polynomial(x0, coeffs)
    residual = l2_error(f, p, x0, eps, mode, m)
    return ApproxResult(p, eps, method, residual, pivot_min)


def solve_normal(f: FunctionSpec, x0, eps, k: int, mode=None, m: int | None = None) -> ApproxResult:
    """Best L2 approximation from the normal equations in the scaled variable.

    The system ``2 * normalized * y = w_scaled`` is solved by ``L D L^T``;
    the coefficients are ``a_i = y_i / eps**i``.
    """
    x0, eps, mode = _prepare(f, x0, eps, k, mode)
    if _exact_polynomial(f, mode):
        return _via_rationals(solve_normal, f, x0, eps, k, mode)
    if mode is Mode.RATIONAL:
        wt = _exact_scaled_moments(f, x0, eps, k + 1)
    else:
        wt = scaled_moments(f, x0, eps, k, m, mode)
    G = [[2 * to_mode(x, mode) for x in row] for row in normalized_moment(k).rows()]
    n = k + 1
    threshold = n * machine_epsilon(mode) * max(abs(x) for row in G for x in row)
    try:
        y, pivot_min = linalg.ldl_solve(G, wt, threshold)
    except linalg.PivotBreakdown as exc:
        raise ConditioningError(
            f"normal equations break down at pivot {exc.index} (k={k}, eps={eps}): "
            f"pivot {exc.pivot} <= {threshold}", k, eps, exc.pivot) from exc
    return _finish(f, x0, eps, k, mode, y, NORMAL, pivot_min, m)


@lru_cache(maxsize=None)
def legendre_monomial_coefficients(n: int) -> tuple:
    """Exact monomial coefficients of ``P_0 .. P_n``; row ``j`` holds ``P_j``."""
    rows = [(Fraction(1),), (Fraction(0), Fraction(1))]
    for j in range(1, n):
        prev, cur = rows[j - 1], rows[j]
        nxt = [Fraction(0)] * (j + 2)
        for i, c in enumerate(cur):
            nxt[i + 1] += Fraction(2 * j + 1, j + 1) * c
        for i, c in enumerate(prev):
            nxt[i] -= Fraction(j, j + 1) * c
        rows.append(tuple(nxt))
    return tuple(rows[: n + 1])


def legendre_kernel(count: int):
    def kernel(t):
        out = [t * 0 + 1, t]
        for j in range(1, count - 1):
            out.append(((2 * j + 1) * t * out[j] - j * out[j - 1]) / (j + 1))
        return out[:count]
    return kernel


def solve_legendre(f: FunctionSpec, x0, eps, k: int, mode=None, m: int | None = None) -> ApproxResult:
    """Best L2 approximation by Legendre projection in the scaled variable.

    ``b_j = (2j+1)/2 * int f(x0+eps*t) P_j(t) dt``; the sum ``b_j P_j(t)``
    is re-expanded in powers of ``t`` and then of ``x - x0``.
    """
    x0, eps, mode = _prepare(f, x0, eps, k, mode)
    if _exact_polynomial(f, mode):
        return _via_rationals(solve_legendre, f, x0, eps, k, mode)
    L = legendre_monomial_coefficients(k)
    if mode is Mode.RATIONAL:
        wt = _exact_scaled_moments(f, x0, eps, k + 1)
        proj = [sum((c * wt[i] for i, c in enumerate(L[j])), Fraction(0)) for j in range(k + 1)]
    else:
        proj = scaled_integrals(f, x0, eps, legendre_kernel(k + 1), k + 1, m, mode)
    b = [proj[j] * (2 * j + 1) / 2 for j in range(k + 1)]
    y = []
    for i in range(k + 1):
        s = to_mode(0, mode)
        for j in range(i, k + 1):
            if i < len(L[j]) and L[j][i] != 0:
                s = s + b[j] * to_mode(L[j][i], mode)
        y.append(s)
    return _finish(f, x0, eps, k, mode, y, LEGENDRE, None, m)


def solve(f: FunctionSpec, x0, eps, k: int, method: str = NORMAL, mode=None,
          m: int | None = None) -> ApproxResult:
    if method in (NORMAL, "normal"):
        return solve_normal(f, x0, eps, k, mode, m)
    if method in (LEGENDRE, "legendre"):
        return solve_legendre(f, x0, eps, k, mode, m)
    raise ValueError(f"unknown method {method!r}; choose one of {METHODS}")


def coefficient_discrepancy(a, b, eps, zero_floor: float = 1e-24):
    """Largest relative difference between two coefficient tuples on one interval.

    Coefficient ``i`` is compared relative to ``max(|a_i|, |b_i|)``; a
    coefficient whose scaled size ``|a_i| eps**i`` is below ``zero_floor``
    times the largest scaled coefficient is treated as zero and compared
    against that floor instead (its relative error is meaningless).
    """
    ys = [max(abs(x), abs(y)) * eps ** i for i, (x, y) in enumerate(zip(a, b))]
    top = max(ys) if ys else 0
    worst = 0
    for i, (x, y) in enumerate(zip(a, b)):
        ref = max(abs(x), abs(y), zero_floor * top / eps ** i)
        if ref:
            worst = max(worst, abs(x - y) / ref)
    return worst


def objective_identity(f: FunctionSpec, result: ApproxResult, mode=None, m: int | None = None):
    """``J`` through ``int f**2 - 2 W.X + X.A.X`` (cross-check for ``residual_l2``).

    Returns ``(J_identity, int f**2)``; the second value is the natural
    scale for comparing against ``residual_l2**2``.
    """
    p = result.poly
    x0, eps = p.center, result.epsilon
    mode = resolve_mode(mode, x0, eps)
    k = p.degree
    W = assemble_w(f, x0, eps, k, mode, m)
    zero = Polynomial(x0, (to_mode(0, mode),))
    f2 = l2_objective(f, zero, x0, eps, mode, m)
    X = p.coeffs
    At = normalized_moment(k).rows()
    quad = to_mode(0, mode)
    for r in range(k + 1):
        for s in range(k + 1):
            if At[r][s] != 0:
                a_rs = 2 * eps ** (r + s + 1) * to_mode(At[r][s], mode)
                quad = quad + X[r] * a_rs * X[s]
    lin = sum((W[r] * X[r] for r in range(k + 1)), to_mode(0, mode))
    return f2 - 2 * lin + quad, f2


def error_bounds(f: FunctionSpec, x0, eps, k: int, mode=None, grid_size: int = 201,
                 M=None) -> list:
    """Coefficient error bounds for ``i = 0..k``.

    ``bound_i = sum_s |alpha[i+1][s]| * 2M / (s+k+1) * eps**(k+1-i)`` with
    ``M`` the sampled sup of the remainder ratio on the interval (or the
    supplied ``M``).
    """
    mode = resolve_mode(mode, x0, eps)
    x0, eps = to_mode(x0, mode), to_mode(eps, mode)
    if M is None:
        M = sample_remainder_bound(f, x0, k, eps, grid_size, mode)
    M = to_mode(M, mode)
    alpha = alpha_table(k)
    out = []
    for i in range(k + 1):
        c = sum((abs(to_mode(alpha[i][s - 1], mode)) * 2 / (s + k + 1)
                 for s in range(1, k + 2)), to_mode(0, mode))
        out.append(c * M * eps ** (k + 1 - i))
    return out


def error_bound(f: FunctionSpec, x0, eps, k: int, i: int, mode=None, grid_size: int = 201,
                M=None):
    if not 0 <= i <= k:
        raise ValueError(f"coefficient index {i} outside 0..{k}")
    return error_bounds(f, x0, eps, k, mode, grid_size, M)[i]
