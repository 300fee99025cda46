"""Best uniform (minimax) approximation on ``[x0-eps, x0+eps]`` by Remez exchange.

The work happens in ``t = (x-x0)/eps`` on ``[-1, 1]`` with a Chebyshev
basis; only the final polynomial is converted to shifted monomials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any

import mpmath
import numpy as np

from . import linalg
from .l2 import FLOAT_DEGREE_CAP
from .poly import FunctionSpec, Polynomial, SmoothnessError, eval_poly
from .scalar import Mode, ModeError, machine_epsilon, resolve_mode, to_mode

MAX_ITERATIONS = 50
_GOLDEN = (math.sqrt(5) - 1) / 2


class RemezError(ArithmeticError):
    """Exchange did not converge; ``result`` holds the last iterate."""

    def __init__(self, message: str, result: "RemezResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class RemezResult:
    poly: Polynomial
    max_error: Any
    alternation_points: tuple
    alternation_residuals: tuple
    levelled_error: Any
    iterations: int
    converged: bool
    history: tuple = ()

    def equioscillates(self, rtol: float = 1e-8) -> bool:
        """Signs alternate and every ``|r|`` is within ``rtol`` of ``max_error``."""
        rs = self.alternation_residuals
        E = self.max_error
        if E == 0:
            return all(r == 0 for r in rs)
        signs_ok = all((a > 0) != (b > 0) and a != 0 and b != 0 for a, b in zip(rs, rs[1:]))
        return signs_ok and all(abs(abs(r) - E) <= rtol * E for r in rs)


@lru_cache(maxsize=None)
def chebyshev_monomial_coefficients(n: int) -> tuple:
    """Exact monomial coefficients of ``T_0 .. T_n``."""
    rows = [(Fraction(1),), (Fraction(0), Fraction(1))]
    for j in range(1, n):
        nxt = [Fraction(0)] * (j + 2)
        for i, c in enumerate(rows[j]):
            nxt[i + 1] += 2 * c
        for i, c in enumerate(rows[j - 1]):
            nxt[i] -= c
        rows.append(tuple(nxt))
    return tuple(rows[: n + 1])


def _cheb_values(k: int, t):
    out = [t * 0 + 1]
    if k >= 1:
        out.append(t)
    for _ in range(2, k + 1):
        out.append(2 * t * out[-1] - out[-2])
    return out


def _cheb_eval(c, t):
    return sum(ci * Ti for ci, Ti in zip(c, _cheb_values(len(c) - 1, t)))


class _Problem:
    """Residual ``r(t) = f(x0 + eps t) - sum c_i T_i(t)`` in one mode."""

    def __init__(self, f: FunctionSpec, x0, eps, mode: Mode):
        self.f, self.x0, self.eps, self.mode = f, x0, eps, mode

    def g(self, t):
        return to_mode(self.f(self.x0 + self.eps * t), self.mode)

    def r(self, c, t):
        return self.g(t) - _cheb_eval(c, t)

    def r_grid(self, c, ts):
        if self.mode is Mode.FLOAT:
            arr = np.asarray(ts, dtype=float)
            gv = self.f.eval_many(self.x0 + self.eps * arr)
            cf = [float(x) for x in c]
            return list(gv - _cheb_eval(cf, arr))
        return [self.r(c, t) for t in ts]


def _golden_max(fn, lo, hi, tol):
    """Maximize a unimodal ``fn`` on ``[lo, hi]``; returns ``(t, fn(t))``."""
    a, b = lo, hi
    c = b - (b - a) * _GOLDEN
    d = a + (b - a) * _GOLDEN
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * _GOLDEN
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * _GOLDEN
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)


def _extrema(prob: _Problem, c, grid):
    """Local maxima of ``|r|``, refined; list of ``(t, r(t))`` sorted by ``t``."""
    vals = prob.r_grid(c, grid)
    mags = [abs(v) for v in vals]
    n = len(grid)
    idx = [i for i in range(n)
           if (i == 0 or mags[i] >= mags[i - 1]) and (i == n - 1 or mags[i] >= mags[i + 1])]
    # Merge plateaus and noise-split peaks: keep the best index per cluster.
    merged = []
    for i in idx:
        if merged and i - merged[-1] <= 2:
            if mags[i] > mags[merged[-1]]:
                merged[-1] = i
        else:
            merged.append(i)
    mode = prob.mode
    ulp = machine_epsilon(mode)
    tol = (ulp ** 0.5 if mode is Mode.FLOAT else mpmath.sqrt(ulp)) * 4
    out = []
    absr = lambda t: abs(prob.r(c, t))
    for i in merged:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]
        t, v = _golden_max(absr, lo, hi, tol)
        best = (t, prob.r(c, t))
        for e in (grid[i], grid[0] if i == 0 else None, grid[-1] if i == n - 1 else None):
            if e is not None:
                re = prob.r(c, e)
                if abs(re) > abs(best[1]):
                    best = (e, re)
        out.append(best)
    out.sort(key=lambda p: p[0])
    return out


def _exchange(ref: list, t_new, sign_new, ref_signs: list) -> list:
    ref = list(ref)
    if t_new < ref[0]:
        if sign_new == ref_signs[0]:
            ref[0] = t_new
        else:
            ref = [t_new] + ref[:-1]
    elif t_new > ref[-1]:
        if sign_new == ref_signs[-1]:
            ref[-1] = t_new
        else:
            ref = ref[1:] + [t_new]
    else:
        for j in range(len(ref) - 1):
            if ref[j] <= t_new <= ref[j + 1]:
                if sign_new == ref_signs[j]:
                    ref[j] = t_new
                else:
                    ref[j + 1] = t_new
                break
    return ref


def _uniform_grid(n: int, mode: Mode) -> list:
    if mode is Mode.FLOAT:
        return list(np.linspace(-1.0, 1.0, n))
    return [to_mode(Fraction(2 * i, n - 1) - 1, mode) for i in range(n)]


def solve_remez(f: FunctionSpec, x0, eps, k: int, mode=None, search_points: int | None = None,
                max_iterations: int = MAX_ITERATIONS, rtol: float = 1e-12) -> RemezResult:
    """Minimax polynomial of degree ``<= k`` by single-point Remez exchange.

    Starts from the ``k+2`` Chebyshev points of the second kind. Stops when
    the error levels (``max_error - |h| <= rtol * max_error``), when the
    maximum error moves by less than ``rtol`` relative, or when the new
    point is already in the reference. Raises :class:`RemezError` after
    ``max_iterations``.
    """
    mode = resolve_mode(mode, x0, eps)
    if mode is Mode.RATIONAL:
        raise ModeError("Remez exchange runs in floating modes only")
    x0, eps = to_mode(x0, mode), to_mode(eps, mode)
    if not eps > 0:
        raise ValueError(f"epsilon must be positive, got {eps!r}")
    if not f.contains(x0 - eps, x0 + eps):
        raise ValueError(f"[x0-eps, x0+eps] is outside the domain of {f.name}")
    if k > f.smoothness:
        raise SmoothnessError(f"{f.name}: degree {k} exceeds declared smoothness n={f.smoothness}")
    if mode is Mode.FLOAT and k > FLOAT_DEGREE_CAP:
        raise ValueError(f"degree {k} exceeds the floating-mode cap of {FLOAT_DEGREE_CAP}")
    if search_points is None:
        search_points = 4096 if mode is Mode.FLOAT else 512
    prob = _Problem(f, x0, eps, mode)
    grid = _uniform_grid(search_points, mode)
    pi = +mpmath.pi if mode is Mode.MP else math.pi
    cos = mpmath.cos if mode is Mode.MP else math.cos
    ref = [-cos(pi * j / (k + 1)) for j in range(k + 2)]
    ref[0], ref[-1] = to_mode(-1, mode), to_mode(1, mode)
    if k % 2 == 1:
        ref[(k + 1) // 2] = to_mode(0, mode)

    history = []
    E_prev = None
    converged = False
    for it in range(1, max_iterations + 1):
        rows = [_cheb_values(k, t) + [to_mode((-1) ** j, mode)] for j, t in enumerate(ref)]
        sol = linalg.solve(rows, [prob.g(t) for t in ref])
        c, h = sol[:-1], sol[-1]
        ext = _extrema(prob, c, grid)
        t_star, r_star = max(ext, key=lambda p: abs(p[1]))
        E = abs(r_star)
        history.append((abs(h), E))
        if E == 0 or E - abs(h) <= rtol * E:
            converged = True
            break
        if E_prev is not None and abs(E - E_prev) <= rtol * E:
            converged = True
            break
        E_prev = E
        hs = 1 if h > 0 else -1
        ref_signs = [hs * (-1) ** j for j in range(k + 2)]
        new_ref = _exchange(ref, t_star, 1 if r_star > 0 else -1, ref_signs)
        if new_ref == ref:
            converged = True
            break
        ref = new_ref

    cheb = chebyshev_monomial_coefficients(k)
    y = [sum((c[i] * to_mode(cheb[i][l], mode) for i in range(l, k + 1) if l < len(cheb[i])),
             to_mode(0, mode)) for l in range(k + 1)]
    poly = Polynomial(x0, tuple(y[l] / eps ** l for l in range(k + 1)))
    result = RemezResult(
        poly=poly,
        max_error=E,
        alternation_points=tuple(x0 + eps * t for t in ref),
        alternation_residuals=tuple(prob.r(c, t) for t in ref),
        levelled_error=abs(h),
        iterations=it,
        converged=converged,
        history=tuple(history),
    )
    if not converged:
        raise RemezError(f"Remez exchange did not converge in {max_iterations} iterations "
                         f"(max_error={E}, levelled={abs(h)})", result)
    return result


def linf_error(f: FunctionSpec, p: Polynomial, x0, eps, grid_size: int = 4096, mode=None):
    """``max |f - p|`` on a dense grid, refined by a parabola through the grid argmax."""
    mode = resolve_mode(mode, x0, eps)
    if mode is Mode.RATIONAL:
        raise ModeError("linf_error runs in floating modes only")
    x0, eps = to_mode(x0, mode), to_mode(eps, mode)
    if not f.contains(x0 - eps, x0 + eps):
        raise ValueError(f"[x0-eps, x0+eps] is outside the domain of {f.name}")
    ts = _uniform_grid(grid_size, mode)
    if mode is Mode.FLOAT:
        xs = x0 + eps * np.asarray(ts)
        ys = list(np.abs(f.eval_many(xs) - eval_poly(p, xs)))
    else:
        ys = [abs(to_mode(f(x0 + eps * t), mode) - eval_poly(p, x0 + eps * t)) for t in ts]
    i = max(range(grid_size), key=lambda j: ys[j])
    best = ys[i]
    if 0 < i < grid_size - 1:
        y0, y1, y2 = ys[i - 1], ys[i], ys[i + 1]
        denom = y0 - 2 * y1 + y2
        if denom < 0:
            step = ts[i + 1] - ts[i]
            tv = ts[i] + step * (y0 - y2) / (2 * denom)
            if ts[i - 1] <= tv <= ts[i + 1]:
                xv = x0 + eps * tv
                best = max(best, abs(to_mode(f(xv), mode) - eval_poly(p, xv)))
    return to_mode(best, mode)
