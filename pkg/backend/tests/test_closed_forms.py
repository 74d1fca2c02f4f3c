# backend/tests/test_closed_forms.py
import math

import numpy as np
import pytest
from scipy import special

from app.core.closed_forms import exp_closed, exp_g, exp_xi_resummed, expansion_fit, poly_closed
from app.errors import DivergentMoment, InvalidParameter, NonConvergent

PI_SQ_3 = math.pi ** 2 / 3.0


def _scipy_var_phi(alpha):
    x = math.exp(-alpha)
    return PI_SQ_3 + 4.0 * special.spence(1.0 + x) - 4.0 * math.tanh(alpha) * math.log1p(x)


@pytest.mark.parametrize("alpha", [1e-3, 0.05, 0.5, 1.0, 2.0, 7.0, 30.0])
def test_exp_var_phi_against_scipy_dilog(alpha):
    assert exp_closed(alpha).var_phi == pytest.approx(_scipy_var_phi(alpha), rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("alpha", [0.01, 0.5, 1.0, 3.0])
def test_exp_var_lz(alpha):
    ev = exp_closed(alpha)
    assert ev.var_lz == pytest.approx(1.0 / (2.0 * math.sinh(alpha) ** 2), rel=1e-13)
    assert ev.product_sq == pytest.approx(ev.var_phi * ev.var_lz)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 2.5])
def test_exp_trig_closed_forms(alpha):
    ev = exp_closed(alpha)
    e2, em2 = math.exp(2 * alpha), math.exp(-2 * alpha)
    assert ev.mean_cos == pytest.approx(1.0 / math.cosh(alpha), rel=1e-14)
    assert ev.var_sin == pytest.approx((e2 + em2 - 2) / (2 * (e2 + 1)), rel=1e-12)
    assert ev.var_cos == pytest.approx(0.5 * (e2 - em2 + 4) / (e2 + 1) - 4 * e2 / (e2 + 1) ** 2, rel=1e-10)
    assert ev.state_bound == pytest.approx(0.5 * (1 - math.tanh(alpha) * math.tanh(alpha / 2) ** 2))


@pytest.mark.parametrize("alpha", [0.2, 0.5, 1.0, 3.0, 10.0])
def test_xi_resummation_agrees(alpha):
    ev = exp_closed(alpha)
    assert exp_xi_resummed(alpha) == pytest.approx(ev.xi, rel=1e-11, abs=1e-14)


def test_xi_resummation_budget():
    with pytest.raises(NonConvergent):
        exp_xi_resummed(1e-3, k_max=100)
    with pytest.raises(InvalidParameter):
        exp_xi_resummed(1.0, k_max=0)


def test_small_alpha_limits():
    alpha = 1e-3
    ev = exp_closed(alpha)
    assert ev.product_sq == pytest.approx(0.5, rel=1e-2)
    assert ev.var_phi / alpha ** 2 == pytest.approx(1.0, rel=2e-2)
    assert 2 * alpha ** 2 * ev.var_lz == pytest.approx(1.0, rel=2e-2)
    assert 2.0 * math.tanh(alpha) * ev.xi == pytest.approx(-PI_SQ_3, abs=1e-5)
    assert ev.g_value == pytest.approx(-4 * math.log(2) * alpha, rel=1e-3)


def test_large_alpha_laws():
    ev = exp_closed(10.0)
    assert abs(ev.var_phi - PI_SQ_3) < 1e-3
    assert abs(math.exp(20.0) * ev.var_lz / 2 - 1) < 1e-4


@pytest.mark.parametrize("alpha", [50.0, 700.0, 1e4])
def test_no_overflow_at_large_alpha(alpha):
    ev = exp_closed(alpha)
    for value in ev.model_dump().values():
        assert math.isfinite(value)
    assert ev.var_phi == pytest.approx(PI_SQ_3)


@pytest.mark.parametrize("alpha", [0.0, -1.0, math.nan, math.inf])
def test_exp_closed_rejects(alpha):
    with pytest.raises(InvalidParameter):
        exp_closed(alpha)
    with pytest.raises(InvalidParameter):
        exp_g(alpha)


def test_expansion_fit():
    fit = expansion_fit()
    assert fit.g_coefficients[0] == pytest.approx(0.0, abs=1e-6)
    for got, expected in zip(fit.g_coefficients[1:3], fit.g_expected[1:]):
        assert got == pytest.approx(expected, rel=1e-2)
    for got, expected in zip(fit.dilog_coefficients, fit.dilog_expected):
        assert got == pytest.approx(expected, rel=1e-2)
    with pytest.raises(InvalidParameter):
        expansion_fit([0.01, 0.02])


# ============================
# Polynomial family
# ============================

def test_poly_zeta_values():
    ev = poly_closed(2.0, rel_tol=1e-8)
    assert ev.var_lz == pytest.approx(special.zeta(2.0) / special.zeta(4.0), rel=1e-13)
    assert ev.norm_sq == pytest.approx(1.0 / (4 * math.pi * special.zeta(4.0)), rel=1e-13)
    assert ev.product_sq == pytest.approx(ev.var_phi * ev.var_lz)


def test_poly_large_alpha_limit():
    ev = poly_closed(50.0)
    assert ev.var_phi == pytest.approx(PI_SQ_3 + 0.5, abs=1e-6)
    assert ev.product_sq == pytest.approx(3.78986, abs=1e-3)
    assert math.sqrt(ev.product_sq) == pytest.approx(1.94675, abs=1e-4)


@pytest.mark.parametrize("alpha", [1.5, 1.2, 0.9])
def test_poly_divergent_lz(alpha):
    with pytest.raises(DivergentMoment):
        poly_closed(alpha)


@pytest.mark.parametrize("alpha", [0.5, 0.2])
def test_poly_not_normalisable(alpha):
    with pytest.raises(InvalidParameter):
        poly_closed(alpha)
