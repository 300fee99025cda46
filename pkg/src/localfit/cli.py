"""Command-line front end: ``localfit approx|sweep|matrix|remez|duel``.

JSON outputs are one UTF-8 object; CSV outputs have a fixed header. Exact
rationals are written as ``"p/q"`` strings, doubles as their shortest
round-trip decimal, and mp values as decimal strings carrying the working
precision. Every JSON payload has a dataclass with ``to_dict``/``from_dict``
so that ``from_dict(json.loads(text))`` reproduces the record.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Any, Optional

import mpmath
import numpy as np

from . import lab
from .l2 import FLOAT_DEGREE_CAP, l2_objective, solve
from .moment import (alpha_table, block_decompose, build_moment, det_direct, det_via_blocks,
                     det_via_factorization, inverse_structure, normalized_moment)
from . import linalg
from .poly import Polynomial, taylor_truncation
from .registry import registry_lookup
from .remez import RemezError, RemezResult, solve_remez
from .scalar import Mode, ModeError

DEFAULT_DPS = 40


class ConfigError(ValueError):
    """Invalid command-line configuration, detected before computing."""


# -- value encoding ---------------------------------------------------------

def encode(value):
    """JSON-ready form of a scalar (recursing into lists and tuples)."""
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    if isinstance(value, dict):
        return {k: encode(v) for k, v in value.items()}
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return value
    if isinstance(value, mpmath.mpf):
        return repr(value)[5:-2]
    if isinstance(value, (float, np.floating)):
        return float(value)
    raise TypeError(f"cannot encode {type(value).__name__}")


def decode(value, mode: Mode):
    """Inverse of :func:`encode` for values computed in ``mode``."""
    if isinstance(value, list):
        return tuple(decode(v, mode) for v in value)
    if value is None or isinstance(value, bool):
        return value
    if mode is Mode.RATIONAL:
        return Fraction(value)
    if mode is Mode.MP:
        return mpmath.mpf(value) if isinstance(value, str) else mpmath.mpf(repr(value))
    return float(value)


def format_cell(value) -> str:
    """CSV cell text: ``p/q`` for rationals, shortest round-trip decimal for doubles."""
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, mpmath.mpf):
        return repr(value)[5:-2]
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def parse_number(text: str, mode: Mode):
    """Parse ``text`` ("0.3", "1e-3", "1/3") into a value of ``mode``."""
    text = text.strip()
    try:
        exact = Fraction(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None
    if mode is Mode.RATIONAL:
        return exact
    if mode is Mode.MP:
        if "/" in text:
            return mpmath.mpf(exact.numerator) / exact.denominator
        return mpmath.mpf(text)
    return float(exact)


def parse_list(text: str, mode: Mode) -> list:
    return [parse_number(t, mode) for t in text.split(",") if t.strip()]


# -- payloads ---------------------------------------------------------------

class _Payload:
    _numeric: tuple = ()

    def to_dict(self) -> dict:
        return {f.name: encode(getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict):
        mode = Mode(data.get("mode", "rational"))
        kw = {}
        for f in fields(cls):
            v = data[f.name]
            if f.name in cls._numeric:
                v = decode(v, mode)
            elif isinstance(v, list):
                v = _tupled(v)
            kw[f.name] = v
        return cls(**kw)


def _tupled(v):
    return tuple(_tupled(x) for x in v) if isinstance(v, list) else v


@dataclass(frozen=True)
class ApproxPayload(_Payload):
    function: str
    mode: str
    center: Any
    epsilon: Any
    degree: int
    method: str
    coefficients: tuple
    residual_l2: Any
    taylor: tuple
    coef_errors: tuple
    perturbation_check: dict
    _numeric = ("center", "epsilon", "coefficients", "residual_l2", "taylor", "coef_errors")


@dataclass(frozen=True)
class RemezPayload(_Payload):
    function: str
    mode: str
    center: Any
    epsilon: Any
    degree: int
    coefficients: tuple
    max_error: Any
    levelled_error: Any
    alternation_points: tuple
    alternation_residuals: tuple
    iterations: int
    converged: bool
    equioscillation: bool
    _numeric = ("center", "epsilon", "coefficients", "max_error", "levelled_error",
                "alternation_points", "alternation_residuals")


@dataclass(frozen=True)
class DetPayload(_Payload):
    mode: str
    degree: int
    epsilon: Any
    direct: Any
    factorization: Any
    blocks: Any
    agree: bool
    _numeric = ("epsilon", "direct", "factorization", "blocks")


@dataclass(frozen=True)
class BlocksPayload(_Payload):
    mode: str
    degree: int
    u: int
    v: int
    permutation: tuple
    B: tuple
    C: tuple
    det_B: Any
    det_C: Any
    det_normalized: Any
    product_matches: bool
    _numeric = ("B", "C", "det_B", "det_C", "det_normalized")


@dataclass(frozen=True)
class InversePayload(_Payload):
    mode: str
    degree: int
    epsilons: tuple
    alpha: tuple
    parity_zero: bool
    consistent: bool
    _numeric = ("epsilons", "alpha")


# -- helpers ----------------------------------------------------------------

def _mode(args) -> Mode:
    mode = Mode(args.mode)
    if mode is Mode.MP:
        mpmath.mp.dps = args.dps
    return mode


def _function(args, mode: Mode):
    f = registry_lookup(args.function)
    if mode is Mode.RATIONAL and f.polynomial is None:
        raise ConfigError(f"rational mode needs a poly:<c0,c1,...> function, got {args.function!r}")
    return f


def _check_degree(k: int, mode: Mode):
    if k < 0:
        raise ConfigError("degree must be non-negative")
    if mode is Mode.FLOAT and k > FLOAT_DEGREE_CAP:
        raise ConfigError(f"degree {k} exceeds the floating-mode cap of {FLOAT_DEGREE_CAP} "
                          f"(use --mode mp or rational)")


def _method(name: str) -> str:
    return {"normal": "normal_equations", "legendre": "legendre_projection"}.get(name, name)


def perturbation_check(f, result, mode: Mode, seed: int = 0, trials: int = 8) -> dict:
    """Random perturbations of the scaled coefficients must not lower the objective."""
    rng = np.random.default_rng(seed)
    p = result.poly
    x0, eps = p.center, result.epsilon
    J = l2_objective(f, p, x0, eps, mode)
    y = [c * eps ** i for i, c in enumerate(p.coeffs)]
    size = max(abs(v) for v in y) or 1
    passed = 0
    for _ in range(trials):
        direction = rng.integers(-1000, 1001, size=len(y))
        if not direction.any():
            direction[0] = 1
        if mode is Mode.RATIONAL:
            d = [Fraction(int(v), 10**5) * size for v in direction]
        else:
            d = [int(v) * size / 10**5 for v in direction]
        q = Polynomial(x0, tuple(c + di / eps ** i for i, (c, di) in enumerate(zip(p.coeffs, d))))
        if l2_objective(f, q, x0, eps, mode) > J:
            passed += 1
    return {"seed": seed, "trials": trials, "passed": passed == trials}


def emit(text: str, output: Optional[str]):
    """Write ``text`` to ``output`` atomically (temp file + rename), or to stdout."""
    if not output:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(output))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".localfit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, output)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(payload: _Payload) -> str:
    return json.dumps(payload.to_dict(), ensure_ascii=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_cell(c) for c in row])
    return buf.getvalue()


# -- commands ---------------------------------------------------------------

def cmd_approx(args) -> int:
    mode = _mode(args)
    f = _function(args, mode)
    _check_degree(args.degree, mode)
    x0, eps = parse_number(args.x0, mode), parse_number(args.epsilon, mode)
    res = solve(f, x0, eps, args.degree, _method(args.method), mode)
    taylor = taylor_truncation(f, res.poly.center, args.degree, mode)
    errs = tuple(abs(a - t) for a, t in zip(res.poly.coeffs, taylor.coeffs))
    check = perturbation_check(f, res, mode, args.seed)
    payload = ApproxPayload(args.function, mode.value, res.poly.center, res.epsilon, args.degree,
                            res.method, tuple(res.poly.coeffs), res.residual_l2,
                            tuple(taylor.coeffs), errs, check)
    emit(_json(payload), args.output)
    return 0 if check["passed"] else 1


SWEEP_HEADER = ("epsilon", "i", "a_i", "taylor_i", "abs_err", "bound", "method", "status")


def sweep_rows(records, fits) -> list:
    rows = []
    for r in records:
        for i, t in enumerate(r.taylor):
            if r.ok:
                rows.append((r.epsilon, i, r.coefficients[i], t, r.coef_errors[i], r.bounds[i],
                             r.method, "ok"))
            else:
                rows.append((r.epsilon, i, None, t, None, None, r.method, r.status))
    method = records[0].method if records else ""
    for fit in fits:
        rows.append((f"slope_{fit.i}", fit.i, fit.slope, fit.r_squared, None, None, method,
                     fit.note or "fit"))
    return rows


def cmd_sweep(args) -> int:
    mode = _mode(args)
    f = _function(args, mode)
    _check_degree(args.degree, mode)
    x0 = parse_number(args.x0, mode)
    eps_max, eps_min = parse_number(args.eps_max, mode), parse_number(args.eps_min, mode)
    records = lab.sweep(f, x0, args.degree, eps_max, eps_min, args.steps, _method(args.method),
                        mode, workers=args.workers)
    fits = lab.fit_slopes(records)
    emit(_csv(SWEEP_HEADER, sweep_rows(records, fits)), args.output)
    return 0 if all(r.ok for r in records) else 1


def cmd_matrix(args) -> int:
    k = args.degree
    if k < 0:
        raise ConfigError("degree must be non-negative")
    if args.action == "det":
        eps = parse_number(args.epsilon, Mode.RATIONAL)
        if eps <= 0:
            raise ConfigError("epsilon must be positive")
        d1 = det_direct(build_moment(k, eps))
        d2 = det_via_factorization(k, eps)
        d3 = det_via_blocks(k, eps)
        payload = DetPayload("rational", k, eps, d1, d2, d3, d1 == d2 == d3)
        ok = payload.agree
    elif args.action == "blocks":
        shape, B, C = block_decompose(k)
        dB = linalg.rational_det(B) if B else Fraction(1)
        dC = linalg.rational_det(C)
        dn = linalg.rational_det(normalized_moment(k).rows())
        payload = BlocksPayload("rational", k, shape.u, shape.v, shape.permutation,
                                tuple(map(tuple, B)), tuple(map(tuple, C)), dB, dC, dn,
                                dB * dC == dn)
        ok = payload.product_matches
    else:
        epsilons = parse_list(args.epsilons, Mode.RATIONAL)
        if any(e <= 0 for e in epsilons):
            raise ConfigError("epsilons must be positive")
        st = inverse_structure(k, epsilons)
        payload = InversePayload("rational", k, tuple(epsilons), alpha_table(k),
                                 st.parity_zero, st.consistent)
        ok = st.consistent and st.parity_zero
    emit(_json(payload), args.output)
    return 0 if ok else 1


def _remez_payload(args, mode, res: RemezResult) -> RemezPayload:
    return RemezPayload(args.function, mode.value, res.poly.center, parse_number(args.epsilon, mode),
                        args.degree, tuple(res.poly.coeffs), res.max_error, res.levelled_error,
                        res.alternation_points, res.alternation_residuals, res.iterations,
                        res.converged, res.equioscillates(args.rtol))


def cmd_remez(args) -> int:
    mode = _mode(args)
    if mode is Mode.RATIONAL:
        raise ConfigError("remez runs in float or mp mode")
    f = _function(args, mode)
    _check_degree(args.degree, mode)
    x0, eps = parse_number(args.x0, mode), parse_number(args.epsilon, mode)
    try:
        res = solve_remez(f, x0, eps, args.degree, mode, max_iterations=args.max_iterations)
    except RemezError as exc:
        emit(_json(_remez_payload(args, mode, exc.result)), args.output)
        print(f"localfit: error: {exc}", file=sys.stderr)
        return 1
    emit(_json(_remez_payload(args, mode, res)), args.output)
    return 0


DUEL_HEADER = ("epsilon", "err_taylor", "err_challenger", "winner")


def cmd_duel(args) -> int:
    mode = _mode(args)
    if mode is Mode.RATIONAL and args.norm.lower() != "l2":
        raise ConfigError("the Linf norm runs in float or mp mode")
    f = _function(args, mode)
    _check_degree(args.degree, mode)
    x0 = parse_number(args.x0, mode)
    coeffs = parse_list(args.challenger, mode)
    if not coeffs:
        raise ConfigError("--challenger needs at least one coefficient")
    P = Polynomial(x0, tuple(coeffs))
    if args.eps_grid:
        grid = parse_list(args.eps_grid, mode)
    else:
        grid = lab.log_grid(parse_number(args.eps_max, mode), parse_number(args.eps_min, mode),
                            args.steps, mode)
    report = lab.duel(f, x0, args.degree, P, grid, args.norm, mode)
    rows = [(e, es, ep, report.winner((e, es, ep))) for e, es, ep in report.grid]
    text = _csv(DUEL_HEADER, rows) + f"threshold={format_cell(report.threshold) or 'none'}\n"
    emit(text, args.output)
    return 0


# -- argument parsing -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="localfit",
        description="Local best L2 and minimax polynomial approximation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, function=True):
        if function:
            p.add_argument("--function", "-f", default="exp",
                           help="exp, sin, cos, log1p, atan, runge or poly:c0,c1,...")
            p.add_argument("--x0", default="0")
        p.add_argument("--degree", "-k", type=int, default=2)
        p.add_argument("--mode", choices=[m.value for m in Mode], default="float")
        p.add_argument("--dps", type=int, default=DEFAULT_DPS, help="decimal digits in mp mode")
        p.add_argument("--output", "-o", help="write here (atomically) instead of stdout")

    p = sub.add_parser("approx", help="best L2 approximation on [x0-eps, x0+eps] (JSON)")
    common(p)
    p.add_argument("--epsilon", "-e", default="0.1")
    p.add_argument("--method", choices=["normal", "legendre"], default="normal")
    p.add_argument("--seed", type=int, default=0, help="seed for the perturbation check")
    p.set_defaults(run=cmd_approx)

    p = sub.add_parser("sweep", help="epsilon sweep with slope fits (CSV)")
    common(p)
    p.add_argument("--eps-max", default="0.1")
    p.add_argument("--eps-min", default="0.001")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--method", choices=["normal", "legendre"], default="normal")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(run=cmd_sweep)

    p = sub.add_parser("matrix", help="moment matrix determinants, blocks, inverse (JSON)")
    p.add_argument("action", choices=["det", "blocks", "inverse"])
    p.add_argument("--degree", "-k", type=int, default=2)
    p.add_argument("--epsilon", "-e", default="1")
    p.add_argument("--epsilons", default="1/2,1,3", help="for inverse: comma-separated")
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_matrix)

    p = sub.add_parser("remez", help="minimax approximation by Remez exchange (JSON)")
    common(p)
    p.add_argument("--epsilon", "-e", default="1")
    p.add_argument("--max-iterations", type=int, default=50)
    p.add_argument("--rtol", type=float, default=1e-8, help="equioscillation tolerance")
    p.set_defaults(run=cmd_remez)

    p = sub.add_parser("duel", help="Taylor truncation against a fixed challenger (CSV)")
    common(p)
    p.add_argument("--challenger", required=True, help="c0,c1,... in powers of (x - x0)")
    p.add_argument("--norm", choices=["L2", "Linf", "l2", "linf"], default="L2")
    p.add_argument("--eps-grid", help="comma-separated epsilons (overrides the log grid)")
    p.add_argument("--eps-max", default="1")
    p.add_argument("--eps-min", default="0.001")
    p.add_argument("--steps", type=int, default=13)
    p.set_defaults(run=cmd_duel)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (ValueError, ArithmeticError, ModeError, KeyError) as exc:
        print(f"localfit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
