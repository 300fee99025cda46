"""Local polynomial approximation on shrinking symmetric intervals.

Best L2 approximations by two independent routes, the moment matrix and its
determinant and inverse structure, minimax approximation by Remez exchange,
and an experiment harness comparing all of them with Taylor truncations.
"""
from .l2 import ApproxResult, ConditioningError, error_bound, error_bounds, l2_error, solve
from .lab import duel, fit_slopes, sweep
from .moment import build_moment, cauchy_det_closed_form, cauchy_det_elimination, CauchySpec
from .poly import FunctionSpec, Polynomial, eval_poly, taylor_truncation
from .registry import registry_lookup
from .remez import RemezResult, solve_remez
from .scalar import Mode, ModeError

__version__ = "0.1.0"

__all__ = [
    "ApproxResult", "CauchySpec", "ConditioningError", "FunctionSpec", "Mode", "ModeError",
    "Polynomial", "RemezResult", "build_moment", "cauchy_det_closed_form",
    "cauchy_det_elimination", "duel", "error_bound", "error_bounds", "eval_poly", "fit_slopes",
    "l2_error", "registry_lookup", "solve", "solve_remez", "sweep", "taylor_truncation",
]
