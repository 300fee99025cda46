"""Number modes.

Three arithmetic modes are supported:

* ``rational`` -- :class:`fractions.Fraction`, exact, polynomial inputs only;
* ``float`` -- IEEE doubles (numpy arrays of doubles count as float);
* ``mp`` -- :class:`mpmath.mpf` at the precision of the active mpmath context.

Plain ``int`` values are exact in every mode and never decide the mode.
Mixing two non-integer modes in one operation is an error; conversions must
be explicit through :func:`to_mode`.
"""
from __future__ import annotations

import enum
import math
import sys
from fractions import Fraction
from typing import Any, Iterable

import mpmath
import numpy as np


class Mode(str, enum.Enum):
    RATIONAL = "rational"
    FLOAT = "float"
    MP = "mp"


class ModeError(TypeError):
    """Raised on mixed-mode arithmetic or an impossible conversion."""


def _kind(value: Any) -> Mode | None:
    if isinstance(value, bool):
        raise ModeError("booleans are not scalars")
    if isinstance(value, (int, np.integer)):
        return None
    if isinstance(value, Fraction):
        return Mode.RATIONAL
    if isinstance(value, mpmath.mpf):
        return Mode.MP
    if isinstance(value, (float, np.floating)):
        return Mode.FLOAT
    if isinstance(value, np.ndarray) and value.dtype.kind in "fi":
        return Mode.FLOAT
    raise ModeError(f"unsupported scalar type {type(value).__name__}")


def mode_of(*values: Any) -> Mode:
    """Common mode of ``values``; integers are neutral, all-int means float."""
    found = {m for m in map(_kind, values) if m is not None}
    if len(found) > 1:
        names = ", ".join(sorted(m.value for m in found))
        raise ModeError(f"mixed scalar modes in one operation: {names}")
    return found.pop() if found else Mode.FLOAT


def resolve_mode(mode: Mode | str | None, *values: Any) -> Mode:
    """Explicit ``mode`` wins; otherwise infer it from ``values``.

    An explicit rational mode still refuses inexact inputs.
    """
    if mode is None:
        return mode_of(*values)
    mode = Mode(mode)
    if mode is Mode.RATIONAL:
        for v in values:
            if _kind(v) not in (None, Mode.RATIONAL):
                raise ModeError(f"rational mode needs exact inputs, got {v!r}")
    return mode


def to_mode(value: Any, mode: Mode | str) -> Any:
    mode = Mode(mode)
    if mode is Mode.RATIONAL:
        kind = _kind(value)
        if kind not in (None, Mode.RATIONAL):
            raise ModeError(f"cannot convert inexact {value!r} to rational")
        return Fraction(int(value)) if kind is None else value
    if mode is Mode.FLOAT:
        if isinstance(value, np.ndarray):
            return value.astype(float)
        if isinstance(value, Fraction):
            return value.numerator / value.denominator
        return float(value)
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def exact(value: Any) -> Fraction:
    """The exact rational value of a binary float, mpf or integer."""
    if isinstance(value, mpmath.mpf):
        if not mpmath.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        man, exp = value.man_exp
        return Fraction(int(man)) * Fraction(2) ** int(exp)
    if isinstance(value, (float, np.floating)):
        return Fraction(float(value))
    return Fraction(value)


def convert_all(values: Iterable[Any], mode: Mode | str) -> list:
    return [to_mode(v, mode) for v in values]


def machine_epsilon(mode: Mode | str) -> Any:
    mode = Mode(mode)
    if mode is Mode.RATIONAL:
        return Fraction(0)
    if mode is Mode.FLOAT:
        return sys.float_info.epsilon
    return mpmath.mp.eps


def is_finite(value: Any) -> bool:
    if isinstance(value, (int, Fraction)):
        return True
    if isinstance(value, mpmath.mpf):
        return bool(mpmath.isfinite(value))
    return math.isfinite(value)


def sqrt(value: Any, mode: Mode | str) -> Any:
    """Square root in ``mode``; in rational mode exact when possible, else float."""
    mode = Mode(mode)
    if mode is Mode.MP:
        return mpmath.sqrt(value)
    if mode is Mode.RATIONAL:
        value = Fraction(value)
        if value < 0:
            raise ValueError("square root of a negative number")
        rn, rd = math.isqrt(value.numerator), math.isqrt(value.denominator)
        if rn * rn == value.numerator and rd * rd == value.denominator:
            return Fraction(rn, rd)
        return math.sqrt(value)
    return math.sqrt(value)


def log(value: Any) -> float:
    """Natural log as a double, for fitting; accepts any mode."""
    if isinstance(value, mpmath.mpf):
        return float(mpmath.log(value))
    if isinstance(value, Fraction):
        return math.log(value.numerator) - math.log(value.denominator)
    return math.log(value)


def as_float(value: Any) -> float:
    if isinstance(value, Fraction):
        return value.numerator / value.denominator
    return float(value)


def pi(mode: Mode | str) -> Any:
    return +mpmath.pi if Mode(mode) is Mode.MP else math.pi
