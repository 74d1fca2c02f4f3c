# backend/app/core/moments.py
"""
Series expressions for the moments of a truncated state.

All sums are read from the coefficient shells S_k = Σ_m C_m^* C_{m+k}:

    ξ      = Σ_{k>=1} 2(-1)^k Re S_k / k²
    ⟨φ⟩    = 4π|A|² Σ_{k>=1} (-1)^k Im S_k / k
    ⟨φ²⟩   = π²/3 + 4π|A|² ξ
    ⟨cosφ⟩ = 2π|A|² Re S_1,  ⟨sinφ⟩ = -2π|A|² Im S_1
    ⟨cos2φ⟩ = 2π|A|² Re S_2

With 2π|A|² = 1/Σ|C_n|² every moment is a ratio of two retained sums.
An extrapolated normalisation tail only enters the mass, so modes beyond
the window count through the diagonal terms alone.
"""
import logging
import math
from typing import Tuple

import numpy as np

from app.core.spectrum import boundary_sum, shell_sums
from app.errors import DivergentMoment
from app.models import MomentReport, TrigReport, TruncatedSpectrum

logger = logging.getLogger(__name__)

PI_SQ_3 = math.pi ** 2 / 3.0


def _alternating_signs(k: np.ndarray) -> np.ndarray:
    return np.where(k % 2 == 0, 1.0, -1.0)


def _xi_from_shells(shells: np.ndarray) -> float:
    if shells.size < 2:
        return 0.0
    k = np.arange(1, shells.size, dtype=np.float64)
    terms = 2.0 * _alternating_signs(k) * shells[1:].real / (k * k)
    return math.fsum(terms)


def _mean_phi_from_shells(s: TruncatedSpectrum, shells: np.ndarray) -> float:
    if shells.size < 2 or s.is_real:
        # S_k is real for real coefficients, so |f|² is even
        return 0.0
    k = np.arange(1, shells.size, dtype=np.float64)
    return math.fsum(2.0 * _alternating_signs(k) * shells[1:].imag / k)


def xi_sum(s: TruncatedSpectrum) -> float:
    """Σ_{m≠n} C_m^* C_n (-1)^{n-m}/(n-m)² over the stored window."""
    return _xi_from_shells(shell_sums(s))


def _phi_from_shells(s: TruncatedSpectrum, shells: np.ndarray) -> Tuple[float, float, float]:
    mean = _mean_phi_from_shells(s, shells) / s.mass
    second = PI_SQ_3 + 2.0 * _xi_from_shells(shells) / s.mass
    var = max(0.0, second - mean * mean)
    return mean, second, var


def phi_moments(s: TruncatedSpectrum) -> Tuple[float, float, float]:
    """(⟨φ⟩, ⟨φ²⟩, σ_φ²)."""
    return _phi_from_shells(s, shell_sums(s))


def lz_moments(s: TruncatedSpectrum) -> Tuple[float, float, float]:
    """(⟨L_z⟩, ⟨L_z²⟩, σ_Lz²) in units of ħ, ħ²."""
    if s.lz_divergent:
        raise DivergentMoment(
            f"Σ n²|C_n|² diverges for '{s.family_name}' at alpha={s.alpha}; σ_Lz is infinite"
        )
    n = s.indices.astype(np.float64)
    w = s.weights
    mean = math.fsum(n * w) / s.mass
    second = math.fsum(np.append(n * n * w, s.lz_tail)) / s.mass
    var = max(0.0, second - mean * mean)
    return mean, second, var


def state_bound(s: TruncatedSpectrum) -> float:
    """(1/2)|1 - 2π|f(π)|²|, the state-dependent lower bound on σ_φσ_Lz."""
    return 0.5 * abs(1.0 - abs(boundary_sum(s)) ** 2 / s.mass)


def theorem_bound(s: TruncatedSpectrum) -> float:
    """π²σ_Lz², an upper estimate of σ_φ²σ_Lz² since σ_φ² <= π²."""
    _, _, var_lz = lz_moments(s)
    return math.pi ** 2 * var_lz


def uncertainty_report(s: TruncatedSpectrum) -> MomentReport:
    shells = shell_sums(s)
    mean_phi, second_phi, var_phi = _phi_from_shells(s, shells)
    mean_lz, second_lz, var_lz = lz_moments(s)
    if var_phi > math.pi ** 2:
        logger.warning("%s alpha=%g: sigma_phi^2=%.6g exceeds pi^2", s.family_name, s.alpha, var_phi)
    return MomentReport(
        mean_phi=mean_phi,
        second_phi=second_phi,
        var_phi=var_phi,
        mean_lz=mean_lz,
        second_lz=second_lz,
        var_lz=var_lz,
        xi=_xi_from_shells(shells),
        product_sq=var_phi * var_lz,
        state_bound=state_bound(s),
        proof_upper_sq=math.pi ** 2 * var_lz,
    )


def trig_report(s: TruncatedSpectrum) -> TrigReport:
    shells = shell_sums(s)
    s1 = shells[1] if shells.size > 1 else 0j
    s2 = shells[2] if shells.size > 2 else 0j

    mean_cos = s1.real / s.mass
    mean_sin = -s1.imag / s.mass
    cos2 = s2.real / s.mass
    second_cos = 0.5 + 0.5 * cos2
    second_sin = 0.5 - 0.5 * cos2
    var_cos = max(0.0, second_cos - mean_cos * mean_cos)
    var_sin = max(0.0, second_sin - mean_sin * mean_sin)

    if s.lz_divergent:
        # the relations are trivially satisfied with σ_Lz = ∞
        sin_res = cos_res = math.inf
    else:
        _, _, var_lz = lz_moments(s)
        sin_res = var_lz * var_sin - 0.25 * mean_cos * mean_cos
        cos_res = var_lz * var_cos - 0.25 * mean_sin * mean_sin

    return TrigReport(
        mean_sin=mean_sin,
        mean_cos=mean_cos,
        second_sin=second_sin,
        second_cos=second_cos,
        var_sin=var_sin,
        var_cos=var_cos,
        sin_relation_residual=sin_res,
        cos_relation_residual=cos_res,
    )
