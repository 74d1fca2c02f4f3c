# backend/tests/test_oracle.py
import math

import numpy as np
import pytest
from hypothesis import given, settings

from app.core.families import exponential_family, single_mode_family, two_mode_family
from app.core.moments import phi_moments, uncertainty_report
from app.core.oracle import (
    adaptive_simpson,
    compare_report,
    quad_lz_moment,
    quad_norm,
    quad_phi_moment,
    quad_trig_moment,
)
from app.core.spectrum import build_spectrum
from app.errors import InvalidParameter, ToleranceNotMet
from app.models import ComparisonStatus, TailKind

from .conftest import complex_windows, spectrum_from


# ============================
# Adaptive Simpson
# ============================

@pytest.mark.parametrize(
    "func, a, b, expected",
    [
        (np.sin, 0.0, math.pi, 2.0),
        (np.exp, 0.0, 1.0, math.e - 1.0),
        (lambda x: x ** 4, 0.0, 1.0, 0.2),
        (lambda x: 1.0 / (1.0 + 100.0 * x * x), -1.0, 1.0, 0.2 * math.atan(10.0)),
    ],
)
def test_adaptive_simpson_known_integrals(func, a, b, expected):
    res = adaptive_simpson(func, a, b, tol=1e-11, max_evals=200_000)
    assert res.value == pytest.approx(expected, abs=1e-10)
    assert res.est_error <= 1e-10
    assert res.evaluations >= 129


def test_adaptive_simpson_evaluation_cap():
    # 64 initial panels cost 129 evaluations; the first refinement does not fit
    with pytest.raises(ToleranceNotMet) as info:
        adaptive_simpson(np.sin, 0.0, math.pi, tol=1e-14, max_evals=130)
    err = info.value
    assert err.evaluations == 129
    assert err.estimate == pytest.approx(2.0, rel=1e-6)
    assert err.error > 0.0


@pytest.mark.parametrize("a, b, tol", [(1.0, 1.0, 1e-8), (1.0, 0.0, 1e-8), (0.0, 1.0, 0.0)])
def test_adaptive_simpson_bad_arguments(a, b, tol):
    with pytest.raises(InvalidParameter):
        adaptive_simpson(np.sin, a, b, tol=tol, max_evals=1000)


# ============================
# Quadrature moments
# ============================

def test_quadrature_of_two_mode_state():
    # |f|² = cos²φ/π
    s = build_spectrum(two_mode_family(), 1.0)
    assert quad_norm(s).value == pytest.approx(1.0, abs=1e-10)
    assert quad_phi_moment(s, 1).value == pytest.approx(0.0, abs=1e-10)
    assert quad_phi_moment(s, 2).value == pytest.approx(math.pi ** 2 / 3.0 + 0.5, abs=1e-9)
    assert quad_lz_moment(s, 1).value == pytest.approx(0.0, abs=1e-10)
    assert quad_lz_moment(s, 2).value == pytest.approx(1.0, abs=1e-10)
    assert quad_trig_moment(s, "cos2").value == pytest.approx(0.75, abs=1e-10)
    assert quad_trig_moment(s, "sin2").value == pytest.approx(0.25, abs=1e-10)


def test_quadrature_rejects_unknown_moments():
    s = build_spectrum(two_mode_family(), 1.0)
    with pytest.raises(InvalidParameter):
        quad_phi_moment(s, 3)
    with pytest.raises(InvalidParameter):
        quad_lz_moment(s, 0)
    with pytest.raises(InvalidParameter):
        quad_trig_moment(s, "tan")


# ============================
# Series vs quadrature
# ============================

@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_exponential_family_agrees(alpha):
    s = build_spectrum(exponential_family(), alpha, rel_tol=1e-10)
    report = compare_report(s, tol=1e-8)
    assert report.passed, [r for r in report.rows if r.status != ComparisonStatus.passed]
    assert {r.quantity for r in report.rows} >= {"norm", "var_phi", "var_lz", "var_sin", "var_cos"}
    assert all(r.status == ComparisonStatus.passed for r in report.rows)


@pytest.mark.parametrize("m", [0, 3, -2])
def test_eigenstate_agrees(m):
    s = build_spectrum(single_mode_family(m), 1.0)
    report = compare_report(s, tol=1e-9)
    assert report.passed
    row = next(r for r in report.rows if r.quantity == "mean_lz")
    assert row.series == m
    assert row.quadrature == pytest.approx(m, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(complex_windows(max_cutoff=8))
def test_random_windows_agree(c):
    report = compare_report(spectrum_from(c), tol=1e-8)
    assert report.passed, [r for r in report.rows if r.status == ComparisonStatus.failed]


def test_quadrature_failure_is_a_failed_row():
    s = build_spectrum(exponential_family(), 1.0)
    report = compare_report(s, tol=1e-8, quad_tol=1e-14, max_evals=200)
    assert not report.passed
    assert all(r.status == ComparisonStatus.failed for r in report.rows)
    assert all(r.quadrature is None for r in report.rows)


def test_divergent_lz_rows_are_not_applicable():
    s = spectrum_from([0.25, 0.5, 1.0, 0.5, 0.25]).model_copy(
        update={"lz_tail": math.inf, "tail_kind": TailKind.divergent}
    )
    report = compare_report(s, tol=1e-8)
    status = {r.quantity: r.status for r in report.rows}
    for name in ("mean_lz", "second_lz", "var_lz"):
        assert status[name] == ComparisonStatus.not_applicable
    assert status["var_phi"] == ComparisonStatus.passed
    assert report.passed


def test_extrapolated_tail_is_excluded_from_lz_rows():
    s = spectrum_from([0.25, 0.5, 1.0, 0.5, 0.25]).model_copy(
        update={"lz_tail": 1e-3, "tail_kind": TailKind.algebraic}
    )
    report = compare_report(s, tol=1e-8)
    row = next(r for r in report.rows if r.quantity == "second_lz")
    assert row.status == ComparisonStatus.passed
    assert "excluded" in row.note


def test_compare_rejects_bad_tolerance():
    with pytest.raises(InvalidParameter):
        compare_report(build_spectrum(two_mode_family(), 1.0), tol=0.0)


def test_extrapolated_normalisation_tail_is_excluded():
    base = spectrum_from([0.25, 0.5, 1.0, 0.5, 0.25])
    mass = base.mass + 1e-3
    s = base.model_copy(update={
        "mass": mass, "mass_tail": 1e-3, "norm_sq": 1.0 / (2.0 * math.pi * mass),
        "tail_kind": TailKind.algebraic,
    })
    report = compare_report(s, tol=1e-8)
    assert report.passed
    rows = {r.quantity: r for r in report.rows}
    assert "normalisation tail" in rows["norm"].note
    assert "normalisation tail" in rows["var_phi"].note
    assert rows["mean_cos"].note == ""


def test_complex_state_has_a_real_mean_angle():
    # S_1 = 0.3 + 0.5i, S_2 = 0.15i
    s = spectrum_from([0.3, 1.0, 0.5j])
    report = uncertainty_report(s)
    assert isinstance(report.mean_phi, float)
    assert isinstance(report.xi, float)
    assert report.mean_phi == pytest.approx(2.0 * (-0.5 + 0.075) / 1.34, rel=1e-12)
    assert report.mean_phi == pytest.approx(quad_phi_moment(s, 1).value, abs=1e-9)


def test_series_approaches_quadrature_as_tolerance_tightens():
    reference = build_spectrum(exponential_family(), 0.5, rel_tol=1e-14)
    q1 = quad_phi_moment(reference, 1, tol=1e-12).value
    q2 = quad_phi_moment(reference, 2, tol=1e-12).value
    exact = q2 - q1 * q1
    errors = []
    for rel_tol in (1e-4, 1e-8, 1e-12):
        _, _, var_phi = phi_moments(build_spectrum(exponential_family(), 0.5, rel_tol=rel_tol))
        errors.append(abs(var_phi - exact))
    assert errors[0] >= errors[1] >= errors[2]
    assert errors[0] > errors[2]
    assert errors[2] < 1e-9
