import math
import warnings
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from localfit.poly import FunctionSpec, Polynomial
from localfit.quadrature import (MAX_NODES, QuadratureError, QuadratureWarning,
                                 gauss_legendre_rule, integrate_moment, integrate_moment_exact,
                                 integrate_scaled, scaled_integrals, monomial_kernel)
from localfit.registry import poly_spec, registry_lookup
from localfit.scalar import Mode, ModeError


def test_small_rules():
    r1 = gauss_legendre_rule(1)
    assert r1.nodes == (0.0,) and r1.weights == (2.0,)
    r2 = gauss_legendre_rule(2)
    assert r2.nodes[1] == pytest.approx(1 / math.sqrt(3), abs=1e-15)
    assert r2.weights == pytest.approx((1.0, 1.0), abs=1e-15)
    r5 = gauss_legendre_rule(5)
    assert abs(sum(w * t ** 9 for t, w in zip(r5.nodes, r5.weights))) <= 1e-15


@pytest.mark.parametrize("m", [3, 8, 17, 32, 64])
def test_against_numpy_leggauss(m):
    rule = gauss_legendre_rule(m)
    x, w = np.polynomial.legendre.leggauss(m)
    np.testing.assert_allclose(rule.nodes, x, atol=1e-14)
    np.testing.assert_allclose(rule.weights, w, atol=1e-14)


@pytest.mark.parametrize("m", range(1, MAX_NODES + 1))
def test_rule_invariants(m):
    rule = gauss_legendre_rule(m)
    assert abs(sum(rule.weights) - 2) <= 1e-14
    assert all(a < b for a, b in zip(rule.nodes, rule.nodes[1:]))
    assert all(w > 0 for w in rule.weights)
    assert all(a == -b for a, b in zip(rule.nodes, reversed(rule.nodes)))
    assert rule.exactness == 2 * m - 1


def test_rule_bounds():
    for m in (0, 65):
        with pytest.raises(ValueError):
            gauss_legendre_rule(m)
    with pytest.raises(ModeError):
        gauss_legendre_rule(4, Mode.RATIONAL)


def test_mp_rule_exactness(mp40):
    rule = gauss_legendre_rule(10, Mode.MP)
    assert abs(sum(rule.weights) - 2) < mpmath.mpf(10) ** -38
    val = sum(w * t ** 18 for t, w in zip(rule.nodes, rule.weights))
    assert abs(val - mpmath.mpf(2) / 19) < mpmath.mpf(10) ** -38


def test_moment_examples():
    one = poly_spec(Polynomial(Fraction(0), (Fraction(1),)))
    assert integrate_moment(one, 0.0, 0.3, 0) == pytest.approx(0.6, rel=1e-15)
    x = poly_spec(Polynomial(Fraction(0), (Fraction(0), Fraction(1))))
    assert integrate_moment(x, 0.0, 0.5, 1) == pytest.approx(2 * 0.5 ** 3 / 3, rel=1e-15)
    exp = registry_lookup("exp")
    assert integrate_moment(exp, 0.0, 1.0, 0) == pytest.approx(math.e - 1 / math.e, rel=1e-14)


def test_exact_moments():
    c = Polynomial(Fraction(0), (Fraction(7),))
    assert integrate_moment_exact(c, 0, Fraction(1, 3), 0) == Fraction(14, 3)
    lin = Polynomial(Fraction(1, 2), (Fraction(0), Fraction(1)))
    assert integrate_moment_exact(lin, Fraction(1, 2), Fraction(1, 4), 0) == 0
    sq = Polynomial(Fraction(0), (Fraction(0), Fraction(0), Fraction(1)))
    assert integrate_moment_exact(sq, 0, Fraction(1, 2), 2) == Fraction(1, 80)


@pytest.mark.parametrize("eps", [1e-3, 1e-2, 0.1, 1.0])
def test_float_matches_exact_for_polynomials(eps):
    p = Polynomial(Fraction(0), tuple(Fraction(c, 7) for c in (3, -1, 4, 1, -5, 9, 2, -6, 5)))
    f = poly_spec(p)
    e = Fraction(eps)
    for j in range(9):
        exact = integrate_moment_exact(p, 0, e, j)
        approx = integrate_moment(f, 0.0, eps, j)
        scale = float(integrate_moment_exact(Polynomial(Fraction(0), tuple(abs(c) for c in p.coeffs)), 0, e, j + (j % 2)))
        assert abs(approx - float(exact)) <= 1e-13 * max(abs(float(exact)), scale)


def test_substitution_invariance():
    f = registry_lookup("cos")
    eps, j = 0.37, 3
    direct = integrate_moment(f, 0.2, eps, j, m=16)
    scaled = eps ** (j + 1) * integrate_scaled(lambda t: math.cos(0.2 + eps * t) * t ** j, Mode.FLOAT, 16)
    assert direct == pytest.approx(scaled, rel=1e-14)


def test_parity_exact_for_even_function():
    f = registry_lookup("cos")
    vals = scaled_integrals(f, 0.0, 0.7, monomial_kernel(6), 6)
    assert vals[1] == 0 and vals[3] == 0 and vals[5] == 0


def test_non_finite_sample_reports_node():
    f = FunctionSpec("pole", lambda x: 1 / x if x != 0 else float("inf"), (-1, 1), 5)
    with pytest.raises(QuadratureError) as err:
        integrate_moment(f, 0.0, 0.5, 0, m=3)
    assert err.value.node == 0.0


def test_refinement_warning_on_hard_integrand():
    f = FunctionSpec("kink", lambda x: abs(x) ** 0.5, (-1, 1), 0)
    with pytest.warns(QuadratureWarning):
        integrate_moment(f, 0.0, 1.0, 0)


def test_smooth_integrand_silent():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        integrate_moment(registry_lookup("exp"), 0.0, 0.5, 4)


def test_domain_check():
    with pytest.raises(ValueError):
        integrate_moment(registry_lookup("log1p"), 0.0, 0.95, 0)
