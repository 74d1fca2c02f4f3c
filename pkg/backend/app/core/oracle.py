# backend/app/core/oracle.py
"""
Quadrature twin of the series engine.

Every moment is integrated over φ ∈ [-π, π] from the explicitly evaluated
state f(φ) (and f'(φ) from the term-wise differentiated series). Nothing
here reads the coefficient shells.
"""
import logging
import math
from typing import Callable, List, Optional

import numpy as np

from app.config import get_settings
from app.core.moments import lz_moments, phi_moments, trig_report
from app.core.spectrum import state_derivative_values, state_values, window_only
from app.errors import InvalidParameter, ToleranceNotMet
from app.models import (
    ComparisonReport,
    ComparisonRow,
    ComparisonStatus,
    QuadratureResult,
    TruncatedSpectrum,
)

logger = logging.getLogger(__name__)

MIN_PANELS = 64
MAX_LEVELS = 40
ROUNDOFF = 64 * np.finfo(np.float64).eps
TRIG_WEIGHTS = ("sin", "cos", "sin2", "cos2")

Integrand = Callable[[np.ndarray], np.ndarray]


def _simpson(h: np.ndarray, fl: np.ndarray, fm: np.ndarray, fr: np.ndarray) -> np.ndarray:
    return h / 6.0 * (fl + 4.0 * fm + fr)


def adaptive_simpson(
    func: Integrand,
    a: float,
    b: float,
    tol: float,
    max_evals: int,
    initial_panels: int = MIN_PANELS,
) -> QuadratureResult:
    """
    Adaptive Simpson, one refinement level at a time.

    All panels still open at a level get their two quarter points evaluated
    in a single vectorised call. A panel of width w owns the error budget
    tol·w/(b-a) and is accepted once |S2 - S1| <= 15·budget, with the
    Richardson correction (S2 - S1)/15 added.
    """
    if not b > a:
        raise InvalidParameter(f"empty interval [{a}, {b}]")
    if not tol > 0:
        raise InvalidParameter(f"tol must be positive, got {tol}")

    panels = max(2, int(initial_panels))
    nodes = np.linspace(a, b, 2 * panels + 1)
    values = np.asarray(func(nodes), dtype=np.float64)
    evaluations = nodes.size

    left, mid, right = nodes[:-2:2], nodes[1:-1:2], nodes[2::2]
    fl, fm, fr = values[:-2:2], values[1:-1:2], values[2::2]
    whole = _simpson(right - left, fl, fm, fr)

    accepted: List[float] = []
    errors: List[float] = []
    open_error = math.inf
    span = b - a

    for level in range(MAX_LEVELS + 1):
        if left.size == 0:
            break
        if evaluations + 2 * left.size > max_evals:
            estimate = math.fsum(accepted) + math.fsum(whole)
            raise ToleranceNotMet(
                f"adaptive Simpson hit the evaluation cap ({max_evals}) with "
                f"{left.size} panels unresolved",
                estimate=estimate,
                error=math.fsum(errors) + open_error,
                evaluations=evaluations,
            )

        ql = 0.5 * (left + mid)
        qr = 0.5 * (mid + right)
        fq = np.asarray(func(np.concatenate([ql, qr])), dtype=np.float64)
        evaluations += fq.size
        fql, fqr = fq[:ql.size], fq[ql.size:]

        half = 0.5 * (right - left)
        s_left = _simpson(half, fl, fql, fm)
        s_right = _simpson(half, fm, fqr, fr)
        refined = s_left + s_right
        diff = refined - whole
        budget = tol * (right - left) / span

        # panels whose two estimates agree to rounding cannot improve further
        floor = ROUNDOFF * (np.abs(s_left) + np.abs(s_right))
        done = (np.abs(diff) <= np.maximum(15.0 * budget, floor)) | (level == MAX_LEVELS)
        accepted.extend((refined[done] + diff[done] / 15.0).tolist())
        errors.extend((np.abs(diff[done]) / 15.0).tolist())

        keep = ~done
        open_error = math.fsum(np.abs(diff[keep]).tolist())
        left, mid, right = (
            np.concatenate([left[keep], mid[keep]]),
            np.concatenate([ql[keep], qr[keep]]),
            np.concatenate([mid[keep], right[keep]]),
        )
        fl, fm, fr = (
            np.concatenate([fl[keep], fm[keep]]),
            np.concatenate([fql[keep], fqr[keep]]),
            np.concatenate([fm[keep], fr[keep]]),
        )
        whole = np.concatenate([s_left[keep], s_right[keep]])

    return QuadratureResult(
        value=math.fsum(accepted),
        est_error=math.fsum(errors),
        evaluations=evaluations,
    )


def _panels_for(s: TruncatedSpectrum) -> int:
    nz = np.flatnonzero(s.coeffs)
    width = 1 if nz.size == 0 else int(nz[-1] - nz[0] + 1)
    return max(MIN_PANELS, 4 * width)


def _integrate(s: TruncatedSpectrum, func: Integrand, tol: Optional[float], max_evals: Optional[int]):
    settings = get_settings()
    return adaptive_simpson(
        func,
        -math.pi,
        math.pi,
        settings.quad_tol if tol is None else tol,
        settings.quad_max_evals if max_evals is None else max_evals,
        initial_panels=_panels_for(s),
    )


def _density(s: TruncatedSpectrum, phis: np.ndarray) -> np.ndarray:
    return np.abs(state_values(s, phis)) ** 2


def quad_norm(s: TruncatedSpectrum, tol: Optional[float] = None, max_evals: Optional[int] = None) -> QuadratureResult:
    return _integrate(s, lambda p: _density(s, p), tol, max_evals)


def quad_phi_moment(
    s: TruncatedSpectrum, power: int, tol: Optional[float] = None, max_evals: Optional[int] = None
) -> QuadratureResult:
    """∫ φ^power |f(φ)|² dφ."""
    if power not in (1, 2):
        raise InvalidParameter(f"power must be 1 or 2, got {power}")
    return _integrate(s, lambda p: p ** power * _density(s, p), tol, max_evals)


def quad_lz_moment(
    s: TruncatedSpectrum, power: int, tol: Optional[float] = None, max_evals: Optional[int] = None
) -> QuadratureResult:
    """
    power=2: ∫ |f'|² dφ. power=1: ∫ Im(f^* f') dφ, i.e. ⟨L_z⟩ = ∫ f^* (-i f') dφ.
    """
    if power == 2:
        def func(p):
            return np.abs(state_derivative_values(s, p)) ** 2
    elif power == 1:
        def func(p):
            return np.imag(np.conj(state_values(s, p)) * state_derivative_values(s, p))
    else:
        raise InvalidParameter(f"power must be 1 or 2, got {power}")
    return _integrate(s, func, tol, max_evals)


def quad_trig_moment(
    s: TruncatedSpectrum, which: str, tol: Optional[float] = None, max_evals: Optional[int] = None
) -> QuadratureResult:
    """∫ w(φ)|f|² dφ for w in sin, cos, sin², cos²."""
    weights = {
        "sin": np.sin,
        "cos": np.cos,
        "sin2": lambda p: np.sin(p) ** 2,
        "cos2": lambda p: np.cos(p) ** 2,
    }
    if which not in weights:
        raise InvalidParameter(f"which must be one of {', '.join(TRIG_WEIGHTS)}, got {which!r}")
    weight = weights[which]
    return _integrate(s, lambda p: weight(p) * _density(s, p), tol, max_evals)


# ============================
# Series vs quadrature table
# ============================

def _row(quantity: str, series: float, quad: float, tol: float, note: str = "") -> ComparisonRow:
    diff = abs(series - quad)
    status = ComparisonStatus.passed if diff <= tol else ComparisonStatus.failed
    return ComparisonRow(
        quantity=quantity, series=series, quadrature=quad, abs_diff=diff, status=status, note=note
    )


def _not_applicable(quantity: str, series: Optional[float], quad: Optional[float], note: str) -> ComparisonRow:
    return ComparisonRow(
        quantity=quantity, series=series, quadrature=quad, status=ComparisonStatus.not_applicable, note=note
    )


def _failed(quantity: str, series: Optional[float], note: str) -> ComparisonRow:
    return ComparisonRow(quantity=quantity, series=series, status=ComparisonStatus.failed, note=note)


def compare_report(
    s: TruncatedSpectrum,
    tol: float,
    quad_tol: Optional[float] = None,
    max_evals: Optional[int] = None,
) -> ComparisonReport:
    """
    Every series moment next to its quadrature twin on the same window.
    Quadrature failures are reported as failed rows, divergent L_z moments as
    not-applicable rows.
    """
    if not tol > 0:
        raise InvalidParameter(f"tol must be positive, got {tol}")
    rows: List[ComparisonRow] = []
    # quadrature only sees the stored window
    window = window_only(s)

    def quad(name: str, fn, *args) -> Optional[float]:
        try:
            return fn(window, *args, tol=quad_tol, max_evals=max_evals).value
        except ToleranceNotMet as e:
            logger.warning("quadrature for %s did not converge: %s", name, e)
            return None

    def add(name: str, series: float, q: Optional[float], note: str = "") -> None:
        if q is None:
            rows.append(_failed(name, series, "quadrature tolerance not met"))
        else:
            rows.append(_row(name, series, q, tol, note))

    norm_note = ""
    if s.mass_tail > 0.0:
        norm_note = f"window only; extrapolated normalisation tail {s.mass_tail:.3g} excluded"
    add("norm", 1.0, quad("norm", quad_norm), norm_note)

    mean_phi, second_phi, var_phi = phi_moments(window)
    q1 = quad("mean_phi", quad_phi_moment, 1)
    q2 = quad("second_phi", quad_phi_moment, 2)
    add("mean_phi", mean_phi, q1, norm_note)
    add("second_phi", second_phi, q2, norm_note)
    add("var_phi", var_phi, None if q1 is None or q2 is None else q2 - q1 * q1, norm_note)

    if window.lz_divergent:
        note = "series diverges (DivergentMoment)"
        rows.append(_not_applicable("mean_lz", None, None, note))
        rows.append(_not_applicable("second_lz", None, None, note))
        rows.append(_not_applicable("var_lz", None, None, note))
    else:
        note = norm_note
        if s.lz_tail > 0.0:
            note = f"window only; extrapolated tail {s.lz_tail:.3g} excluded"
        l1 = quad("mean_lz", quad_lz_moment, 1)
        l2 = quad("second_lz", quad_lz_moment, 2)
        mean_lz, second_lz, var_lz = lz_moments(window)
        add("mean_lz", mean_lz, l1, note)
        add("second_lz", second_lz, l2, note)
        add("var_lz", var_lz, None if l1 is None or l2 is None else l2 - l1 * l1, note)

    trig = trig_report(window)
    q_sin = quad("mean_sin", quad_trig_moment, "sin")
    q_cos = quad("mean_cos", quad_trig_moment, "cos")
    q_sin2 = quad("second_sin", quad_trig_moment, "sin2")
    q_cos2 = quad("second_cos", quad_trig_moment, "cos2")
    add("mean_sin", trig.mean_sin, q_sin)
    add("mean_cos", trig.mean_cos, q_cos)
    add("second_sin", trig.second_sin, q_sin2)
    add("second_cos", trig.second_cos, q_cos2)
    add("var_sin", trig.var_sin, None if q_sin is None or q_sin2 is None else q_sin2 - q_sin * q_sin)
    add("var_cos", trig.var_cos, None if q_cos is None or q_cos2 is None else q_cos2 - q_cos * q_cos)

    report = ComparisonReport(
        family_name=s.family_name, alpha=s.alpha, cutoff=s.cutoff, tol=tol, rows=rows
    )
    logger.debug("compare %s alpha=%g N=%d passed=%s", s.family_name, s.alpha, s.cutoff, report.passed)
    return report
