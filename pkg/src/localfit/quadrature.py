"""Gauss-Legendre integration of ``f(x) * kernel((x - x0)/eps)`` over ``[x0-eps, x0+eps]``.

Integrals are taken in the scaled variable ``t = (x - x0)/eps`` on
``[-1, 1]``. Mirror-image nodes are summed pairwise before anything else, so
parity cancellations (an even ``f`` against an odd kernel) are exact.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import mpmath
import numpy as np

from .poly import FunctionSpec, Polynomial
from .scalar import Mode, ModeError, is_finite, machine_epsilon, resolve_mode, to_mode

MAX_NODES = 64


class QuadratureError(ArithmeticError):
    """The integrand produced a non-finite value."""

    def __init__(self, message: str, node):
        super().__init__(message)
        self.node = node


class QuadratureWarning(RuntimeWarning):
    """Node doubling did not reach the requested agreement."""


@dataclass(frozen=True)
class QuadratureRule:
    nodes: tuple
    weights: tuple

    @property
    def order(self) -> int:
        return len(self.nodes)

    @property
    def exactness(self) -> int:
        return 2 * self.order - 1

    def positive_half(self):
        """``(t, w)`` pairs with ``t > 0``, plus the weight at 0 (or None)."""
        m = self.order
        pos = list(zip(self.nodes[(m + 1) // 2:], self.weights[(m + 1) // 2:]))
        w0 = self.weights[m // 2] if m % 2 else None
        return pos, w0


def _legendre_with_derivative(m: int, x):
    p0, p1 = x * 0 + 1, x
    for n in range(2, m + 1):
        p0, p1 = p1, ((2 * n - 1) * x * p1 - (n - 1) * p0) / n
    if m == 1:
        return p1, x * 0 + 1
    return p1, m * (x * p1 - p0) / (x * x - 1)


@lru_cache(maxsize=None)
def _rule(m: int, mode: Mode, dps: int) -> QuadratureRule:
    one = to_mode(1, mode)
    pi = +mpmath.pi if mode is Mode.MP else math.pi
    cos = mpmath.cos if mode is Mode.MP else math.cos
    tol = 1e-15 if mode is Mode.FLOAT else machine_epsilon(mode) * 8
    pos_nodes, pos_weights = [], []
    # Chebyshev nodes cos((2j-1)pi/(2m)) for the non-negative half, largest first.
    for j in range(1, m // 2 + 1):
        x = cos(pi * (2 * j - 1) / (2 * m))
        for _ in range(100):
            p, dp = _legendre_with_derivative(m, x)
            dx = p / dp
            x = x - dx
            if abs(dx) <= tol:
                break
        else:
            raise ArithmeticError(f"Newton iteration for node {j} of m={m} did not converge")
        _, dp = _legendre_with_derivative(m, x)
        pos_nodes.append(x)
        pos_weights.append(2 / ((one - x * x) * dp * dp))
    nodes = [-x for x in pos_nodes] + list(reversed(pos_nodes))
    weights = pos_weights + list(reversed(pos_weights))
    if m % 2:
        zero = one * 0
        _, dp = _legendre_with_derivative(m, zero)
        nodes.insert(m // 2, zero)
        weights.insert(m // 2, 2 / (dp * dp))
    return QuadratureRule(tuple(nodes), tuple(weights))


def gauss_legendre_rule(m: int, mode: Mode | str = Mode.FLOAT) -> QuadratureRule:
    """``m``-point Gauss-Legendre rule on ``[-1, 1]`` (Newton from Chebyshev guesses).

    Nodes are exactly symmetric; for odd ``m`` the middle node is exactly 0.
    """
    if not 1 <= m <= MAX_NODES:
        raise ValueError(f"node count must be in [1, {MAX_NODES}], got {m}")
    mode = Mode(mode)
    if mode is Mode.RATIONAL:
        raise ModeError("Gauss-Legendre nodes are irrational")
    return _rule(m, mode, mpmath.mp.dps if mode is Mode.MP else 0)


def refinement_tolerance(mode: Mode):
    """Relative agreement required between successive node counts.

    In mp mode this is ``sqrt(ulp)``: with at most 64 nodes, comparing the 32
    and 64 point rules cannot confirm more than that for the slower integrands.
    """
    if mode is Mode.FLOAT:
        return 1e-12
    return mpmath.sqrt(machine_epsilon(mode))


def default_nodes(k: int) -> int:
    return min(MAX_NODES, max(16, k + 8))


def _sample(f: FunctionSpec, x0, eps, ts, mode: Mode):
    xs = [x0 + eps * t for t in ts]
    if mode is Mode.FLOAT and f.vectorized:
        vals = [float(v) for v in np.asarray(f.eval(np.array(xs, dtype=float)), dtype=float)]
    else:
        vals = [to_mode(f(x), mode) for x in xs]
    for x, v in zip(xs, vals):
        if not is_finite(v):
            raise QuadratureError(f"{f.name} is not finite at x={x!r}", x)
    return vals


def scaled_integrals_once(f: FunctionSpec, x0, eps, kernel: Callable, count: int,
                          rule: QuadratureRule, mode: Mode):
    """``I_j = int_{-1}^{1} f(x0 + eps*t) K_j(t) dt`` for ``j < count`` with one rule.

    ``kernel(t)`` returns ``[K_0(t), ..., K_{count-1}(t)]`` and each ``K_j``
    must have parity ``(-1)**j``. Also returns the scale ``int |f|``.
    """
    pos, w0 = rule.positive_half()
    ts = [t for t, _ in pos]
    all_ts = ts + [-t for t in ts] + ([ts[0] * 0] if w0 is not None else [])
    vals = _sample(f, x0, eps, all_ts, mode)
    n = len(ts)
    zero = to_mode(0, mode)
    out = [zero] * count
    scale = zero
    for idx, (t, w) in enumerate(pos):
        gp, gm = vals[idx], vals[n + idx]
        even, odd = gp + gm, gp - gm
        ks = kernel(t)
        for j in range(count):
            out[j] = out[j] + w * ks[j] * (odd if j % 2 else even)
        scale = scale + w * (abs(gp) + abs(gm))
    if w0 is not None:
        g0 = vals[-1]
        ks = kernel(all_ts[-1])
        for j in range(0, count, 2):
            out[j] = out[j] + w0 * ks[j] * g0
        scale = scale + w0 * abs(g0)
    return out, scale


def scaled_integrals(f: FunctionSpec, x0, eps, kernel: Callable, count: int,
                     m: int | None = None, mode=None):
    """Kernel integrals with node doubling until successive results agree.

    Starts at ``m`` nodes (default ``max(16, count+7)``) and doubles up to
    64; accepts when all results move by less than ``1e-12`` relative to the
    integrand scale (``sqrt(ulp)`` in mp mode). Emits
    :class:`QuadratureWarning` and returns the finest values otherwise.
    """
    mode = resolve_mode(mode, x0, eps)
    x0, eps = to_mode(x0, mode), to_mode(eps, mode)
    m = default_nodes(count - 1) if m is None else m
    tol = refinement_tolerance(mode)
    prev, _ = scaled_integrals_once(f, x0, eps, kernel, count, gauss_legendre_rule(m, mode), mode)
    while 2 * m <= MAX_NODES:
        m *= 2
        cur, scale = scaled_integrals_once(f, x0, eps, kernel, count,
                                           gauss_legendre_rule(m, mode), mode)
        diff = max(abs(c - p) for c, p in zip(cur, prev))
        prev = cur
        if diff <= tol * max(scale, max(abs(c) for c in cur)):
            return cur
    warnings.warn(f"{f.name}: quadrature on [x0-eps, x0+eps] with eps={eps} "
                  f"not converged at {m} nodes", QuadratureWarning, stacklevel=2)
    return prev


def monomial_kernel(count: int):
    def kernel(t):
        out = [t * 0 + 1]
        for _ in range(count - 1):
            out.append(out[-1] * t)
        return out
    return kernel


def scaled_moments(f: FunctionSpec, x0, eps, k: int, m: int | None = None, mode=None):
    """``int_{-1}^{1} f(x0 + eps*t) t**j dt`` for ``j = 0..k``."""
    return scaled_integrals(f, x0, eps, monomial_kernel(k + 1), k + 1, m, mode)


def integrate_moment(f: FunctionSpec, x0, eps, j: int, m: int | None = None, mode=None):
    """``int_{x0-eps}^{x0+eps} f(x) (x-x0)**j dx`` by Gauss-Legendre in the scaled variable."""
    if j < 0:
        raise ValueError("moment index must be non-negative")
    mode = resolve_mode(mode, x0, eps)
    eps_m = to_mode(eps, mode)
    if not f.contains(to_mode(x0, mode) - eps_m, to_mode(x0, mode) + eps_m):
        raise ValueError(f"[x0-eps, x0+eps] is outside the domain of {f.name}")
    m = default_nodes(j) if m is None else m
    kernel = lambda t: [t ** j] if j % 2 == 0 else [t * 0, t ** j]
    count = 1 if j % 2 == 0 else 2
    vals = scaled_integrals(f, x0, eps, kernel, count, m, mode)
    return eps_m ** (j + 1) * vals[-1]


def integrate_moment_exact(p: Polynomial, x0, eps, j: int) -> Fraction:
    """Exact ``int_{x0-eps}^{x0+eps} p(x) (x-x0)**j dx`` for rational ``p``."""
    if j < 0:
        raise ValueError("moment index must be non-negative")
    x0, eps = Fraction(x0), Fraction(eps)
    q = p.recenter(x0)
    total = Fraction(0)
    for i, c in enumerate(q.coeffs):
        n = i + j
        if n % 2 == 0:
            total += Fraction(c) * 2 * eps ** (n + 1) / (n + 1)
    return total


def integrate_scaled(g: Callable, mode: Mode | str, m: int = 32):
    """``int_{-1}^{1} g(t) dt`` with one plain rule (no parity pairing)."""
    rule = gauss_legendre_rule(m, mode)
    total = to_mode(0, mode)
    for t, w in zip(rule.nodes, rule.weights):
        total = total + w * g(t)
    return total
