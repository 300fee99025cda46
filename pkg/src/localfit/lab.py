"""Experiment harness: epsilon sweeps, log-log slope fits and Taylor-vs-challenger duels."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Optional, Sequence

import mpmath
import numpy as np

from .l2 import ConditioningError, error_bounds, l2_error, solve
from .poly import FunctionSpec, Polynomial, taylor_truncation
from .quadrature import QuadratureError
from .registry import registry_lookup  # noqa: F401  (re-exported)
from .remez import linf_error
from .scalar import Mode, resolve_mode, to_mode
from . import scalar

MIN_FIT_POINTS = 5


@dataclass(frozen=True)
class SweepRecord:
    epsilon: Any
    coefficients: Optional[tuple]
    taylor: tuple
    coef_errors: Optional[tuple]
    bounds: Optional[tuple]
    residual_l2: Any
    method: str
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class SlopeFit:
    i: int
    slope: Optional[float]
    intercept: Optional[float]
    r_squared: Optional[float]
    eps_range: Optional[tuple]
    n_points: int
    zeros_excluded: int = 0
    note: str = ""

    @property
    def refused(self) -> bool:
        return self.slope is None


@dataclass(frozen=True)
class DuelReport:
    challenger: Polynomial
    taylor: Polynomial
    norm: str
    grid: tuple
    threshold: Any = None

    def winner(self, row) -> str:
        _, err_s, err_p = row
        return "taylor" if err_s < err_p else "challenger"


def log_grid(eps_max, eps_min, steps: int, mode: Mode) -> list:
    """``steps`` log-spaced values from ``eps_max`` down to ``eps_min``."""
    if mode is Mode.MP:
        hi, lo = (mpmath.mpf(repr(e)) if isinstance(e, float) else mpmath.mpf(e)
                  for e in (eps_max, eps_min))
        return [hi * (lo / hi) ** (mpmath.mpf(j) / (steps - 1)) for j in range(steps)]
    hi, lo = float(eps_max), float(eps_min)
    vals = [hi * (lo / hi) ** (j / (steps - 1)) for j in range(steps)]
    vals[0], vals[-1] = hi, lo
    if mode is Mode.RATIONAL:
        return [Fraction(format(v, ".12g")) for v in vals]
    return vals


def _plain(value):
    """Records hold doubles or exact fractions; mp values are rounded to doubles."""
    if isinstance(value, mpmath.mpf):
        return float(value)
    return value


def _sweep_point(f, x0, k, eps, method, mode, taylor, grid_size):
    try:
        res = solve(f, x0, eps, k, method, mode)
        errs = [abs(a - t) for a, t in zip(res.poly.coeffs, taylor.coeffs)]
        bounds = error_bounds(f, x0, eps, k, mode, grid_size)
    except (ConditioningError, QuadratureError, ArithmeticError) as exc:
        return SweepRecord(_plain(eps), None, tuple(map(_plain, taylor.coeffs)), None, None,
                           None, method, status=f"failed: {exc}")
    return SweepRecord(
        epsilon=_plain(eps),
        coefficients=tuple(map(_plain, res.poly.coeffs)),
        taylor=tuple(map(_plain, taylor.coeffs)),
        coef_errors=tuple(map(_plain, errs)),
        bounds=tuple(map(_plain, bounds)),
        residual_l2=_plain(res.residual_l2),
        method=res.method,
    )


def sweep(f: FunctionSpec, x0, k: int, eps_max=1e-1, eps_min=1e-3, steps: int = 10,
          method: str = "normal_equations", mode=None, workers: int = 1,
          grid_size: int = 201) -> list:
    """Solve on a log-spaced epsilon grid and compare against the Taylor coefficients.

    Records come back in descending epsilon whatever ``workers`` is. A
    solver failure at one epsilon marks that record failed and the sweep
    continues.
    """
    mode = resolve_mode(mode, x0)
    x0 = to_mode(x0, mode)
    if steps < MIN_FIT_POINTS:
        raise ValueError(f"steps must be at least {MIN_FIT_POINTS}")
    if not 0 < eps_min < eps_max:
        raise ValueError("need 0 < eps_min < eps_max")
    a, b = f.domain
    if eps_max > min(x0 - a, b - x0):
        raise ValueError(f"eps_max={eps_max} does not fit inside the domain {f.domain} around x0={x0}")
    grid = log_grid(eps_max, eps_min, steps, mode)
    taylor = taylor_truncation(f, x0, k, mode)
    task = lambda eps: _sweep_point(f, x0, k, eps, method, mode, taylor, grid_size)
    if workers > 1 and mode is not Mode.MP:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(task, grid))
    else:
        records = [task(eps) for eps in grid]
    return sorted(records, key=lambda r: r.epsilon, reverse=True)


def fit_slopes(records: Sequence[SweepRecord], min_points: int = MIN_FIT_POINTS) -> list:
    """Least-squares line through ``(log eps, log err_i)`` for each coefficient index.

    Zero errors (exact parity cases) are excluded and counted; an index with
    fewer than ``min_points`` usable points gets a refused fit.
    """
    good = [r for r in records if r.ok]
    if not good:
        return []
    k = len(good[0].coef_errors) - 1
    fits = []
    for i in range(k + 1):
        pts = [(r.epsilon, r.coef_errors[i]) for r in good]
        zeros = sum(1 for _, e in pts if e == 0)
        pts = [(eps, e) for eps, e in pts if e != 0 and math.isfinite(scalar.as_float(e))]
        if len(pts) < min_points:
            note = f"refused: {len(pts)} usable points (< {min_points})"
            if zeros:
                note += f", {zeros} exact zeros excluded"
            fits.append(SlopeFit(i, None, None, None, None, len(pts), zeros, note))
            continue
        xs = np.array([scalar.log(eps) for eps, _ in pts])
        ys = np.array([scalar.log(e) for _, e in pts])
        slope, intercept = np.polyfit(xs, ys, 1)
        pred = slope * xs + intercept
        ss_res = float(np.sum((ys - pred) ** 2))
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
        eps_vals = [scalar.as_float(eps) for eps, _ in pts]
        note = f"{zeros} exact zeros excluded" if zeros else ""
        fits.append(SlopeFit(i, float(slope), float(intercept), r2,
                             (min(eps_vals), max(eps_vals)), len(pts), zeros, note))
    return fits


def duel(f: FunctionSpec, x0, k: int, challenger: Polynomial, eps_grid: Sequence[Any],
         norm: str = "L2", mode=None) -> DuelReport:
    """Compare the Taylor truncation with a fixed challenger on each epsilon.

    ``threshold`` is the largest tested epsilon such that the Taylor
    polynomial has the strictly smaller error at every tested epsilon up
    to and including it; ``None`` when it already loses at the smallest.
    """
    norm = norm.upper().replace("INF", "inf")
    if norm not in ("L2", "Linf"):
        raise ValueError(f"norm must be L2 or Linf, got {norm!r}")
    mode = resolve_mode(mode, x0, *eps_grid)
    x0 = to_mode(x0, mode)
    S = taylor_truncation(f, x0, k, mode)
    P = challenger
    if P.degree > k:
        raise ValueError(f"challenger has degree {P.degree} > {k}")
    if P.center != x0:
        P = P.recenter(x0)
    P = P.padded(k)
    pc = [to_mode(c, mode) for c in P.coeffs]
    if all(abs(a - b) <= 1e-14 * max(1, abs(b)) for a, b in zip(pc, S.coeffs)):
        raise ValueError("challenger equals the Taylor truncation; the comparison is vacuous")
    P = Polynomial(x0, tuple(pc))
    err = l2_error if norm == "L2" else (lambda f_, p_, x_, e_, m_: linf_error(f_, p_, x_, e_, mode=m_))
    rows = []
    for eps in sorted((to_mode(e, mode) for e in eps_grid), reverse=True):
        rows.append((_plain(eps), _plain(err(f, S, x0, eps, mode)), _plain(err(f, P, x0, eps, mode))))
    threshold = None
    for eps, es, ep in reversed(rows):
        if es < ep:
            threshold = eps
        else:
            break
    return DuelReport(P, S, norm, tuple(rows), threshold)
