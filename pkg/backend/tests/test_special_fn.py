# backend/tests/test_special_fn.py
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from app.core.special_fn import ZETA_DIRECT_TERMS, dilog, hurwitz_zeta, ln1p, zeta
from app.errors import InvalidParameter


@pytest.mark.parametrize("x", [1e-8, 0.01, 0.3, 0.5, 0.51, 0.7, 0.99, 1.0])
def test_dilog_matches_scipy(x):
    # scipy's spence(w) is Li2(1 - w)
    expected = special.spence(1.0 + x)
    got = dilog(-x)
    np.testing.assert_allclose(got.value, expected, rtol=1e-13, atol=1e-15)
    assert got.est_error <= 1e-14


def test_dilog_at_minus_one():
    assert math.isclose(dilog(-1.0).value, -math.pi ** 2 / 12.0, rel_tol=1e-14)


def test_dilog_at_zero():
    res = dilog(0.0)
    assert res.value == 0.0
    assert res.terms_used == 0


@given(st.floats(min_value=-1.0, max_value=0.0, allow_nan=False))
@settings(max_examples=200)
def test_dilog_property(z):
    np.testing.assert_allclose(dilog(z).value, special.spence(1.0 - z), rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("z", [0.1, -1.5, math.nan])
def test_dilog_domain(z):
    with pytest.raises(InvalidParameter):
        dilog(z)


@pytest.mark.parametrize("s", [1.001, 1.5, 2.0, 3.3, 6.0, 40.0])
@pytest.mark.parametrize("q", [1.0, 2.5, 17.0, 100.0, 1e5])
def test_hurwitz_zeta_matches_scipy(s, q):
    got = hurwitz_zeta(s, q)
    np.testing.assert_allclose(got.value, special.zeta(s, q), rtol=1e-12)


def test_zeta_even_values():
    assert math.isclose(zeta(2.0).value, math.pi ** 2 / 6.0, rel_tol=1e-14)
    assert math.isclose(zeta(4.0).value, math.pi ** 4 / 90.0, rel_tol=1e-14)


@pytest.mark.parametrize("s, q", [(1.0, 1.0), (0.5, 1.0), (2.0, 0.0), (2.0, -1.0)])
def test_zeta_domain(s, q):
    with pytest.raises(InvalidParameter):
        hurwitz_zeta(s, q)


def test_ln1p_tiny_argument():
    assert ln1p(1e-20) == 1e-20
    assert math.isclose(ln1p(1.0), math.log(2.0), rel_tol=1e-15)
    with pytest.raises(InvalidParameter):
        ln1p(-1.0)


# ============================
# Error estimates and monotonicity
# ============================

def _long_dilog(z: float, terms: int) -> float:
    if abs(z) <= 0.5:
        return math.fsum(z ** k / k ** 2 for k in range(1, terms + 1))
    w = z / (z - 1.0)
    inner = math.fsum(w ** k / k ** 2 for k in range(1, terms + 1))
    return -inner - 0.5 * math.log1p(-z) ** 2


@pytest.mark.parametrize("z", [-0.05, -0.3, -0.5, -0.7, -math.exp(-0.2), -1.0])
def test_dilog_error_estimate_bounds_longer_summation(z):
    got = dilog(z)
    reference = _long_dilog(z, 10 * got.terms_used)
    assert abs(got.value - reference) <= got.est_error + 1e-15 * abs(reference)


@pytest.mark.parametrize("s", [1.6, 2.0, 3.3, 6.0, 12.0])
def test_zeta_error_estimate_bounds_longer_summation(s):
    got = zeta(s)
    reference = hurwitz_zeta(s, 1.0, direct_terms=10 * ZETA_DIRECT_TERMS)
    assert reference.est_error <= got.est_error
    assert abs(got.value - reference.value) <= got.est_error + 1e-15 * reference.value


def test_zeta_is_decreasing():
    strict = [zeta(s).value for s in np.linspace(1.6, 40.0, 200)]
    assert all(a > b for a, b in zip(strict, strict[1:]))
    # ζ(s) - 1 ~ 2^-s drops below one ulp of 1 past s ≈ 53
    flat = [zeta(s).value for s in np.linspace(40.0, 60.0, 50)]
    assert all(a >= b for a, b in zip(flat, flat[1:]))
    assert flat[-1] >= 1.0
