"""Named test functions: exp, sin, cos, log1p, atan, runge and ``poly:c0,c1,...``."""
from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np

from .poly import FunctionSpec, Polynomial, eval_poly
from .scalar import ModeError

# Declared smoothness for the analytic functions; degrees are capped far below.
ANALYTIC_SMOOTHNESS = 40
POLY_SMOOTHNESS = 10**6

NAMES = ("exp", "sin", "cos", "log1p", "atan", "runge", "poly:<c0,c1,...>")


class UnknownFunctionError(KeyError):
    def __str__(self):
        return str(self.args[0])


def _transcendental(name, np_fn, mp_fn):
    def f(x):
        if isinstance(x, Fraction):
            raise ModeError(f"{name} is transcendental; rational mode is for polynomials")
        if isinstance(x, mpmath.mpf):
            return mp_fn(x)
        return np_fn(x)
    f.__name__ = name
    return f


_exp = _transcendental("exp", np.exp, mpmath.exp)
_sin = _transcendental("sin", np.sin, mpmath.sin)
_cos = _transcendental("cos", np.cos, mpmath.cos)
_log1p = _transcendental("log1p", np.log1p, mpmath.log1p)
_atan = _transcendental("atan", np.arctan, mpmath.atan)


def _runge(x):
    if isinstance(x, Fraction):
        raise ModeError("runge is only run in floating modes")
    return 1 / (1 + 25 * x * x)


def _sin_deriv(i, x):
    return (_sin, _cos, lambda t: -_sin(t), lambda t: -_cos(t))[i % 4](x)


def _cos_deriv(i, x):
    return (_cos, lambda t: -_sin(t), lambda t: -_cos(t), _sin)[i % 4](x)


def parse_poly(text: str) -> Polynomial:
    """``"1,0,3"`` -> ``1 + 3x**2`` centred at 0 with exact coefficients."""
    parts = [p.strip() for p in text.split(",")]
    if not parts or any(p == "" for p in parts):
        raise ValueError(f"malformed coefficient list {text!r}")
    try:
        coeffs = tuple(Fraction(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"malformed coefficient list {text!r}") from exc
    return Polynomial(Fraction(0), coeffs)


def poly_spec(p: Polynomial, name: str | None = None, domain=(-1, 1)) -> FunctionSpec:
    return FunctionSpec(
        name=name or "poly:" + ",".join(str(c) for c in p.coeffs),
        eval=lambda x: eval_poly(p, x),
        domain=domain,
        smoothness=POLY_SMOOTHNESS,
        deriv_at=p.derivative_at,
        vectorized=True,
        exact=p.mode.value == "rational",
        polynomial=p,
    )


_BUILTIN = {
    "exp": lambda: FunctionSpec("exp", _exp, (-1, 1), ANALYTIC_SMOOTHNESS,
                                deriv_at=lambda i, x: _exp(x), vectorized=True),
    "sin": lambda: FunctionSpec("sin", _sin, (-1, 1), ANALYTIC_SMOOTHNESS,
                                deriv_at=_sin_deriv, vectorized=True),
    "cos": lambda: FunctionSpec("cos", _cos, (-1, 1), ANALYTIC_SMOOTHNESS,
                                deriv_at=_cos_deriv, vectorized=True),
    "log1p": lambda: FunctionSpec("log1p", _log1p, (-0.9, 1), ANALYTIC_SMOOTHNESS,
                                  vectorized=True),
    "atan": lambda: FunctionSpec("atan", _atan, (-1, 1), ANALYTIC_SMOOTHNESS,
                                 vectorized=True),
    "runge": lambda: FunctionSpec("runge", _runge, (-1, 1), ANALYTIC_SMOOTHNESS,
                                  vectorized=True),
}


def registry_lookup(name: str) -> FunctionSpec:
    """Resolve a registry name to a :class:`FunctionSpec`."""
    name = name.strip()
    if name.startswith("poly:"):
        return poly_spec(parse_poly(name[len("poly:"):]))
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise UnknownFunctionError(
            f"unknown function {name!r}; the registry has: {', '.join(NAMES)}") from None
