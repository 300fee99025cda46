import math
from fractions import Fraction

import pytest

from localfit import lab
from localfit.l2 import ConditioningError, solve
from localfit.lab import SweepRecord, duel, fit_slopes, log_grid, sweep
from localfit.moment import build_moment
from localfit.poly import Polynomial, taylor_truncation
from localfit.registry import registry_lookup
from localfit.scalar import Mode

EXP = registry_lookup("exp")
SINH1 = math.sinh(1)


def _synthetic(power, n=10):
    eps = log_grid(0.1, 1e-3, n, Mode.FLOAT)
    return [SweepRecord(e, (0.0,), (0.0,), (e ** power,), (1.0,), 0.0, "normal_equations")
            for e in eps]


def test_log_grid():
    g = log_grid(0.1, 1e-3, 10, Mode.FLOAT)
    assert g[0] == 0.1 and g[-1] == 1e-3 and len(g) == 10
    ratios = [a / b for a, b in zip(g, g[1:])]
    assert max(ratios) == pytest.approx(min(ratios))
    assert all(isinstance(x, Fraction) for x in log_grid(0.1, 1e-3, 5, Mode.RATIONAL))


def test_fit_exact_power_law():
    fit = fit_slopes(_synthetic(3))[0]
    assert abs(fit.slope - 3) < 1e-12
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.eps_range == (1e-3, 0.1) and fit.n_points == 10


def test_fit_refuses_short_series():
    fit = fit_slopes(_synthetic(2, n=4))[0]
    assert fit.refused and "refused" in fit.note


def test_fit_excludes_zeros():
    recs = _synthetic(2)
    recs[0] = SweepRecord(recs[0].epsilon, (0.0,), (0.0,), (0.0,), (1.0,), 0.0, "n")
    fit = fit_slopes(recs)[0]
    assert fit.zeros_excluded == 1 and fit.n_points == 9
    assert fit.slope == pytest.approx(2.0)


def test_exp_sweep_monotone_and_stable():
    recs = sweep(EXP, 0.0, 2)
    assert [r.epsilon for r in recs] == sorted((r.epsilon for r in recs), reverse=True)
    for i in range(3):
        errs = [r.coef_errors[i] for r in recs]
        assert all(a > b for a, b in zip(errs, errs[1:]))
    # oracle: rerun each point at doubled quadrature order
    reruns = [solve(EXP, 0.0, r.epsilon, 2, m=32).coefficients for r in recs]
    for i in range(3):
        errs = [abs(c[i] - 1 / math.factorial(i)) for c in reruns]
        assert all(a > b for a, b in zip(errs, errs[1:]))
    for r, again in zip(recs, reruns):
        for i in range(3):
            assert abs(again[i] - r.coefficients[i]) * r.epsilon ** i <= 1e-14


def test_exp_slopes():
    fits = fit_slopes(sweep(EXP, 0.0, 2))
    assert fits[0].slope >= 2.8 and fits[2].slope >= 0.8
    assert all(f.r_squared >= 0.98 for f in fits)


def test_cos_parity():
    recs = sweep(registry_lookup("cos"), 0.0, 2)
    assert all(r.coef_errors[1] <= 1e-15 for r in recs)


def test_polynomial_sweeps():
    recs = sweep(registry_lookup("poly:1,2,3"), Fraction(0), 2, Fraction(1, 10), Fraction(1, 1000),
                 mode=Mode.RATIONAL)
    assert all(e == 0 for r in recs for e in r.coef_errors)
    recs = sweep(registry_lookup("poly:1,2,3"), 0.0, 3)
    assert all(e <= 1e-10 for r in recs for e in r.coef_errors)


def test_parallel_determinism():
    f = registry_lookup("atan")
    assert sweep(f, 0.0, 3, workers=4) == sweep(f, 0.0, 3, workers=1) == sweep(f, 0.0, 3)


def test_failure_marks_record(monkeypatch):
    real = lab.solve

    def flaky(f, x0, eps, k, method, mode):
        if eps < 0.002:
            raise ConditioningError("forced", k, eps, 0.0)
        return real(f, x0, eps, k, method, mode)

    monkeypatch.setattr(lab, "solve", flaky)
    recs = sweep(EXP, 0.0, 2)
    bad = [r for r in recs if not r.ok]
    assert len(bad) == 2 and all("forced" in r.status for r in bad)
    assert len(fit_slopes(recs)) == 3


def test_sweep_validation():
    with pytest.raises(ValueError):
        sweep(EXP, 0.0, 2, steps=4)
    with pytest.raises(ValueError):
        sweep(EXP, 0.0, 2, eps_max=1e-3, eps_min=1e-2)
    with pytest.raises(ValueError):
        sweep(registry_lookup("log1p"), 0.0, 2, eps_max=0.95)


@pytest.mark.parametrize("name", ["exp", "sin", "cos", "log1p", "atan", "runge",
                                  "poly:1,-2,1,3,1,2,-1,5"])
def test_registry_rates_and_bounds(mp40, name):
    """Slopes reach k+1-i (minus 0.2) and every record respects the bound."""
    f = registry_lookup(name)
    for k in range(5):
        recs = sweep(f, 0, k, mode=Mode.MP)
        assert all(r.ok for r in recs)
        for r in recs:
            for i in range(k + 1):
                assert r.coef_errors[i] <= 1.05 * r.bounds[i]
        for fit in fit_slopes(recs):
            if fit.refused:
                assert fit.zeros_excluded == len(recs)
            else:
                assert fit.slope >= (k + 1 - fit.i) - 0.2
                assert fit.r_squared >= 0.98


def test_duel_unit_interval():
    P = Polynomial(0.0, (SINH1,))
    rep = duel(EXP, 0.0, 0, P, [1.0, 0.1, 0.01])
    eps, es, ep = rep.grid[0]
    assert eps == 1.0 and ep < es
    assert rep.winner(rep.grid[0]) == "challenger"
    assert rep.threshold == 0.1


def test_duel_polynomial_taylor_always_wins():
    f = registry_lookup("poly:1,2")
    rep = duel(f, 0.0, 1, Polynomial(0.0, (1.0, 2.5)), [1.0, 0.5, 0.1])
    assert all(rep.winner(row) == "taylor" for row in rep.grid)
    assert all(row[1] == 0 for row in rep.grid)
    assert rep.threshold == 1.0


def test_duel_rejects_taylor():
    with pytest.raises(ValueError, match="vacuous"):
        duel(EXP, 0.0, 1, Polynomial(0.0, (1.0, 1.0)), [0.5])
    with pytest.raises(ValueError):
        duel(EXP, 0.0, 0, Polynomial(0.0, (1.0, 1.0)), [0.5])
    with pytest.raises(ValueError):
        duel(EXP, 0.0, 0, Polynomial(0.0, (1.1,)), [0.5], norm="L1")


def test_duel_linf():
    rep = duel(EXP, 0.0, 0, Polynomial(0.0, (1.05,)), [1.0, 0.1], norm="Linf")
    assert rep.norm == "Linf"
    assert rep.grid[0][1] == pytest.approx(math.e - 1, rel=1e-12)


@pytest.mark.parametrize("delta,j", [(0.05, 0), (1e-3, 0), (0.2, 1), (-0.1, 2)])
def test_duel_sanity_lower_bound(delta, j):
    k = 2
    S = taylor_truncation(EXP, 0.0, k)
    coeffs = list(S.coeffs)
    coeffs[j] += delta
    P = Polynomial(0.0, tuple(coeffs))
    grid = log_grid(0.5, 1e-3, 8, Mode.FLOAT)
    rep = duel(EXP, 0.0, k, P, grid)
    for eps, es, ep in rep.grid:
        # ||P - S|| from the moment matrix; triangle inequality ties it to err_P
        d = [Fraction(delta) if i == j else Fraction(0) for i in range(k + 1)]
        A = build_moment(k, Fraction(eps))
        norm_ps = math.sqrt(sum(d[r] * A.entry(r + 1, s + 1) * d[s]
                                for r in range(k + 1) for s in range(k + 1)))
        assert ep >= norm_ps - es - 1e-15
        assert norm_ps == pytest.approx(abs(delta) * eps ** (j + 0.5) * math.sqrt(2 / (2 * j + 1)))
        if es <= 0.5 * norm_ps:
            assert ep >= 0.5 * abs(delta) * eps ** (j + 0.5) * math.sqrt(2 / (2 * j + 1))
