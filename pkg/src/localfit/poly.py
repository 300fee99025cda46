"""Polynomials in the shifted basis, Taylor truncations and remainder ratios."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

import numpy as np

from .scalar import Mode, ModeError, is_finite, machine_epsilon, mode_of, resolve_mode, to_mode


class SmoothnessError(ValueError):
    """The requested degree exceeds the declared smoothness of the function."""


@dataclass(frozen=True)
class Polynomial:
    """``sum(c[i] * (x - center)**i)``.

    ``coeffs[i]`` multiplies ``(x - center)**i``; the degree bound is
    ``len(coeffs) - 1``.
    """

    center: Any
    coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        if not coeffs:
            raise ValueError("a polynomial needs at least one coefficient")
        for c in coeffs:
            if not is_finite(c):
                raise ValueError(f"non-finite coefficient {c!r}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def mode(self) -> Mode:
        return mode_of(self.center, *self.coeffs)

    def __call__(self, x):
        return eval_poly(self, x)

    def padded(self, k: int) -> "Polynomial":
        """Same polynomial with the degree bound raised to ``k``."""
        if k < self.degree:
            raise ValueError(f"cannot pad degree {self.degree} down to {k}")
        zero = self.coeffs[0] * 0
        return Polynomial(self.center, self.coeffs + (zero,) * (k - self.degree))

    def derivative_at(self, i: int, x):
        """Exact ``i``-th derivative at ``x``."""
        if i > self.degree:
            return eval_poly(Polynomial(self.center, (self.coeffs[0] * 0,)), x)
        dc = tuple(c * (math.factorial(j) // math.factorial(j - i))
                   for j, c in enumerate(self.coeffs) if j >= i)
        return eval_poly(Polynomial(self.center, dc), x)

    def recenter(self, center) -> "Polynomial":
        """Re-expand around ``center`` by the binomial theorem."""
        mode = mode_of(center, self.center, *self.coeffs)
        d = to_mode(center, mode) - to_mode(self.center, mode)
        cs = [to_mode(c, mode) for c in self.coeffs]
        out = []
        for i in range(len(cs)):
            s = cs[i] * 0
            for j in range(i, len(cs)):
                s = s + cs[j] * math.comb(j, i) * d ** (j - i)
            out.append(s)
        return Polynomial(center, tuple(out))

    def to_absolute(self) -> tuple:
        """Coefficients of ``1, x, x**2, ...`` (display only)."""
        zero = self.coeffs[0] * 0
        return self.recenter(zero).coeffs


def eval_poly(p: Polynomial, x):
    """Horner evaluation in the shifted variable ``x - center``.

    Works for scalars of any mode and for float numpy arrays. Coefficients
    are converted to the mode of ``x``; exact inputs never silently meet
    inexact coefficients.
    """
    if isinstance(x, (int, np.integer)):
        mode = p.mode
    else:
        mode = mode_of(x)
        if mode is Mode.RATIONAL and p.mode is not Mode.RATIONAL:
            raise ModeError("cannot evaluate an inexact polynomial at a rational point")
    h = x - to_mode(p.center, mode)
    acc = to_mode(p.coeffs[-1], mode)
    if isinstance(h, np.ndarray):
        acc = acc + 0 * h
    for c in reversed(p.coeffs[:-1]):
        acc = acc * h + to_mode(c, mode)
    return acc


@dataclass(frozen=True)
class FunctionSpec:
    """A real function on ``domain`` with ``smoothness`` + 1 derivatives.

    ``eval`` maps a scalar to a scalar in the same mode; when ``vectorized``
    it also accepts float numpy arrays. ``deriv_at(i, x)`` is an optional
    exact derivative oracle; without it derivatives come from central finite
    differences. ``exact`` marks functions that may run in rational mode.
    """

    name: str
    eval: Callable[[Any], Any]
    domain: tuple
    smoothness: int
    deriv_at: Optional[Callable[[int, Any], Any]] = None
    vectorized: bool = False
    exact: bool = False
    polynomial: Optional[Polynomial] = field(default=None, compare=False)

    def __call__(self, x):
        return self.eval(x)

    def contains(self, lo, hi) -> bool:
        a, b = self.domain
        return a <= lo and hi <= b

    def eval_many(self, xs):
        """Evaluate on a float array, falling back to a loop."""
        xs = np.asarray(xs, dtype=float)
        if self.vectorized:
            return np.asarray(self.eval(xs), dtype=float)
        return np.array([float(self.eval(float(x))) for x in xs])


def fd_derivative(f: FunctionSpec, i: int, x0, mode=None):
    """``f^{(i)}(x0)`` by central differences, Richardson-extrapolated once.

    The stencil width is ``eps**(1/(i+4)) * max(1, |x0|)`` with ``eps`` the
    unit roundoff of the working mode.
    """
    mode = resolve_mode(mode, x0)
    if mode is Mode.RATIONAL:
        raise ModeError(f"{f.name}: finite differences are not exact")
    x0 = to_mode(x0, mode)
    if i == 0:
        return f(x0)
    eps = machine_epsilon(mode)
    h = eps ** (to_mode(1, mode) / (i + 4)) * max(to_mode(1, mode), abs(x0))

    # Mirror-image stencil nodes are summed in pairs so that parity cancels exactly.
    def central(step):
        s = step * 0
        for j in range((i + 1) // 2):
            offset = to_mode(Fraction(i, 2) - j, mode) * step
            pair = f(x0 + offset) + (-1) ** i * f(x0 - offset)
            s = s + (-1) ** j * math.comb(i, j) * pair
        if i % 2 == 0:
            s = s + (-1) ** (i // 2) * math.comb(i, i // 2) * f(x0)
        return s / step ** i

    return (4 * central(h / 2) - central(h)) / 3


def derivative(f: FunctionSpec, i: int, x0, mode=None):
    """``f^{(i)}(x0)`` from the oracle when present, else finite differences."""
    mode = resolve_mode(mode, x0)
    x0 = to_mode(x0, mode)
    if f.deriv_at is not None:
        return f.deriv_at(i, x0)
    return fd_derivative(f, i, x0, mode)


def taylor_truncation(f: FunctionSpec, x0, k: int, mode=None) -> Polynomial:
    """Degree-``k`` Taylor polynomial of ``f`` at ``x0``."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    if k > f.smoothness:
        raise SmoothnessError(
            f"{f.name}: degree {k} exceeds declared smoothness n={f.smoothness}")
    mode = resolve_mode(mode, x0)
    if mode is Mode.RATIONAL and f.deriv_at is None:
        raise ModeError(f"{f.name}: rational mode needs an exact derivative oracle")
    x0 = to_mode(x0, mode)
    coeffs = tuple(to_mode(derivative(f, i, x0, mode), mode) / math.factorial(i)
                   for i in range(k + 1))
    return Polynomial(x0, coeffs)


def remainder_ratio(f: FunctionSpec, x0, k: int, x, mode=None, taylor: Polynomial | None = None):
    """``G_k(x) = (f(x) - S_k(x)) / (x - x0)**(k+1)``, continuous at ``x0``.

    At ``x = x0`` the limit ``f^{(k+1)}(x0)/(k+1)!`` is returned. Pass a
    precomputed ``taylor`` (degree ``k``) to avoid recomputing it.
    """
    mode = resolve_mode(mode, x0, x)
    x0, x = to_mode(x0, mode), to_mode(x, mode)
    if x == x0:
        if k > f.smoothness:
            raise SmoothnessError(
                f"{f.name}: degree {k} exceeds declared smoothness n={f.smoothness}")
        return to_mode(derivative(f, k + 1, x0, mode), mode) / math.factorial(k + 1)
    s = taylor if taylor is not None else taylor_truncation(f, x0, k, mode)
    return (to_mode(f(x), mode) - eval_poly(s, x)) / (x - x0) ** (k + 1)


def symmetric_grid(x0, eps, size: int, mode) -> list:
    """``size`` equispaced points on ``[x0-eps, x0+eps]``; ``x0`` is always included."""
    if size < 3:
        raise ValueError("grid_size must be at least 3")
    n = size if size % 2 else size + 1
    half = (n - 1) // 2
    return [x0 + eps * (to_mode(j, mode) / half) for j in range(-half, half + 1)]


def sample_remainder_bound(f: FunctionSpec, x0, k: int, eps, grid_size: int = 201,
                           mode=None):
    """Grid estimate of ``sup |G_k|`` over ``[x0-eps, x0+eps]``.

    Even ``grid_size`` is bumped by one so that ``x0`` is a grid point. The
    value is a sample maximum, not a certified bound.
    """
    mode = resolve_mode(mode, x0, eps)
    x0, eps = to_mode(x0, mode), to_mode(eps, mode)
    if not f.contains(x0 - eps, x0 + eps):
        raise ValueError(f"[x0-eps, x0+eps] is outside the domain of {f.name}")
    s = taylor_truncation(f, x0, k, mode)
    grid = symmetric_grid(x0, eps, grid_size, mode)
    return max(abs(remainder_ratio(f, x0, k, x, mode, taylor=s)) for x in grid)
