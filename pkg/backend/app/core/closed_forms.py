# backend/app/core/closed_forms.py
"""
Closed forms for the exponential family C_n = e^{-α|n|} and the zeta-based
pieces of the polynomial family C_n = |n|^{-α}.

Everything is written in x = e^{-α} with expm1/log1p so that α anywhere in
(0, 1e4] neither overflows nor cancels.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np

from app.core.families import polynomial_family
from app.core.moments import phi_moments, state_bound
from app.core.special_fn import dilog, ln1p, zeta
from app.core.spectrum import build_spectrum
from app.errors import DivergentMoment, InvalidParameter, NonConvergent
from app.models import ExpansionFit, ExpFamilyEval, PolyFamilyEval

logger = logging.getLogger(__name__)

PI_SQ_3 = math.pi ** 2 / 3.0
XI_MAX_TERMS = 2_000_000


def _check_alpha(alpha: float) -> None:
    if not (math.isfinite(alpha) and alpha > 0):
        raise InvalidParameter(f"alpha must be a positive number, got {alpha}")


def exp_g(alpha: float) -> float:
    """g(α) = -4 tanh(α) ln(1 + e^{-α})."""
    _check_alpha(alpha)
    return -4.0 * math.tanh(alpha) * ln1p(math.exp(-alpha))


def exp_closed(alpha: float) -> ExpFamilyEval:
    _check_alpha(alpha)
    x = math.exp(-alpha)
    x2 = math.exp(-2.0 * alpha)
    em = math.expm1(-2.0 * alpha)  # x² - 1

    var_lz = 2.0 * x2 / (em * em)
    li2 = dilog(-x).value
    g = exp_g(alpha)
    var_phi = PI_SQ_3 + 4.0 * li2 + g

    mean_cos = 2.0 * x / (1.0 + x2)
    cos2 = x2 * (3.0 - x2) / (1.0 + x2)
    var_sin = em * em / (2.0 * (1.0 + x2))
    var_cos = 0.5 * (1.0 + cos2) - mean_cos * mean_cos

    # f(π) = A tanh(α/2) and 2π|A|² = tanh α
    th = math.tanh(alpha)
    half = math.tanh(0.5 * alpha)
    bound = 0.5 * abs(1.0 - th * half * half)

    return ExpFamilyEval(
        alpha=alpha,
        var_phi=var_phi,
        var_lz=var_lz,
        product_sq=var_phi * var_lz,
        g_value=g,
        dilog_value=li2,
        xi=(var_phi - PI_SQ_3) / (2.0 * th),
        mean_cos=mean_cos,
        mean_cos2=cos2,
        var_sin=var_sin,
        var_cos=max(0.0, var_cos),
        state_bound=bound,
    )


def exp_xi_resummed(alpha: float, k_max: int = XI_MAX_TERMS) -> float:
    """
    ξ(α) = 2 Σ_{k>=1} (-1)^k (coth α + k) e^{-αk} / k².

    The terms decrease in magnitude, so the first omitted term bounds the
    remainder; NonConvergent if that bound is still above 1e-16·max(1, |ξ|)
    at k_max.
    """
    _check_alpha(alpha)
    if k_max < 1:
        raise InvalidParameter(f"k_max must be >= 1, got {k_max}")
    coth = 1.0 / math.tanh(alpha)
    k = np.arange(1, k_max + 2, dtype=np.float64)
    mags = 2.0 * (coth + k) * np.exp(-alpha * k) / (k * k)
    signs = np.where(k % 2 == 0, 1.0, -1.0)

    # first index whose successor is negligible even against the leading term
    scale = max(1.0, float(mags[0]))
    small = np.flatnonzero(mags[1:] <= 1e-17 * scale)
    if small.size == 0:
        raise NonConvergent(
            f"xi resummation at alpha={alpha} needs more than k_max={k_max} terms"
        )
    stop = int(small[0]) + 1
    return math.fsum(signs[:stop] * mags[:stop])


def poly_closed(alpha: float, rel_tol: Optional[float] = None) -> PolyFamilyEval:
    """
    Polynomial family: |A|² and σ_Lz² from zeta values, σ_φ² from the series
    engine on the truncated family.
    """
    if not (math.isfinite(alpha) and alpha > 0.5):
        raise InvalidParameter(f"polynomial family needs alpha > 1/2 to be normalisable, got {alpha}")
    if alpha <= 1.5:
        raise DivergentMoment(
            f"sigma_Lz diverges for the polynomial family at alpha={alpha} (needs alpha > 3/2)"
        )
    z_norm = zeta(2.0 * alpha).value
    var_lz = zeta(2.0 * alpha - 2.0).value / z_norm

    s = build_spectrum(polynomial_family(), alpha, rel_tol=rel_tol)
    _, _, var_phi = phi_moments(s)
    logger.debug("poly alpha=%g: N=%d var_phi=%.12g var_lz=%.12g", alpha, s.cutoff, var_phi, var_lz)

    return PolyFamilyEval(
        alpha=alpha,
        var_lz=var_lz,
        var_phi=var_phi,
        norm_sq=1.0 / (4.0 * math.pi * z_norm),
        product_sq=var_phi * var_lz,
        state_bound=state_bound(s),
        cutoff=s.cutoff,
    )


def expansion_fit(alphas: Optional[Sequence[float]] = None) -> ExpansionFit:
    """
    Cubic least-squares fits of g(α) and Li₂(-e^{-α}) for small α, to compare
    with g ≈ -4 ln2·α + 2α² and Li₂ ≈ -π²/12 + ln2·α - α²/4.
    """
    if alphas is None:
        alphas = np.geomspace(1e-3, 5e-2, 25)
    a = np.asarray(alphas, dtype=np.float64)
    if a.size < 4:
        raise InvalidParameter("expansion fit needs at least 4 alpha values")

    g = np.array([exp_g(float(v)) for v in a])
    li2 = np.array([dilog(-math.exp(-float(v))).value for v in a])
    g_fit = np.polynomial.polynomial.polyfit(a, g, 3)
    li2_fit = np.polynomial.polynomial.polyfit(a, li2, 3)

    ln2 = math.log(2.0)
    return ExpansionFit(
        alphas=a.tolist(),
        g_coefficients=[float(v) for v in g_fit],
        dilog_coefficients=[float(v) for v in li2_fit],
        g_expected=[0.0, -4.0 * ln2, 2.0],
        dilog_expected=[-math.pi ** 2 / 12.0, ln2, -0.25],
    )
