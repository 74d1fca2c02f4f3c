# backend/app/models.py
"""
Shared data shapes.

Everything here is an immutable pydantic model so reports can be handed
between threads, dumped to JSON by the CLI and returned by the API as-is.
ħ = 1 throughout: σ_Lz² is in units of ħ², products in units of ħ.
"""
import math
from enum import Enum
from typing import Callable, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

HBAR_CONVENTION = "hbar = 1"

# rule(n, alpha) -> complex amplitudes, vectorised over the integer array n
CoefficientRule = Callable[[np.ndarray, float], np.ndarray]


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


# ============================
# Families and spectra
# ============================

class CoefficientFamily(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    rule: CoefficientRule
    is_real: bool = True
    is_symmetric: bool = True
    support: Optional[int] = Field(
        None, ge=0, description="Largest |n| with a nonzero coefficient, if finite"
    )
    description: str = ""

    def coefficients(self, n: np.ndarray, alpha: float) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        values = np.asarray(self.rule(n, alpha), dtype=np.complex128)
        return np.broadcast_to(values, n.shape).astype(np.complex128, copy=True)

    def coefficient(self, n: int, alpha: float) -> complex:
        return complex(self.coefficients(np.array([n]), alpha)[0])


class TailKind(str, Enum):
    zero = "zero"
    geometric = "geometric"
    algebraic = "algebraic"
    divergent = "divergent"
    exact = "exact"


class TruncatedSpectrum(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    family_name: str
    alpha: float = Field(..., gt=0)
    cutoff: int = Field(..., ge=0)
    coeffs: np.ndarray  # complex, index i <-> n = i - cutoff
    norm_sq: float = Field(..., gt=0)
    mass: float = Field(..., gt=0)  # Σ|C_n|² incl. mass_tail, so 2π·norm_sq·mass = 1
    mass_tail: float = Field(0.0, ge=0)  # extrapolated Σ_{|n|>N} |C_n|² for algebraic tails
    tail_bound: float = Field(..., ge=0)
    lz_tail: float = Field(0.0, ge=0)  # extrapolated Σ_{|n|>N} n²|C_n|², inf if divergent
    tail_kind: TailKind = TailKind.exact
    is_real: bool = True
    is_symmetric: bool = True
    hbar_convention: Literal["hbar = 1"] = HBAR_CONVENTION

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.cutoff, self.cutoff + 1, dtype=np.int64)

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    @property
    def lz_divergent(self) -> bool:
        return math.isinf(self.lz_tail)


class StateSample(_Frozen):
    phi: float = Field(..., ge=-math.pi, le=math.pi)
    value: complex


# ============================
# Special functions / quadrature
# ============================

class EvalResult(_Frozen):
    value: float
    est_error: float = Field(..., ge=0)
    terms_used: int = Field(..., ge=0)


class QuadratureResult(_Frozen):
    value: float
    est_error: float = Field(..., ge=0)
    evaluations: int = Field(..., ge=0)


# ============================
# Moments
# ============================

class MomentReport(_Frozen):
    mean_phi: float
    second_phi: float
    var_phi: float = Field(..., ge=0)
    mean_lz: float
    second_lz: float = Field(..., ge=0)
    var_lz: float = Field(..., ge=0)
    xi: float
    product_sq: float = Field(..., ge=0)
    hr_bound_sq: float = 0.25
    state_bound: float = Field(..., ge=0)
    proof_upper_sq: float = Field(..., ge=0)  # π²·σ_Lz², from σ_φ² ≤ π²

    @property
    def product(self) -> float:
        return math.sqrt(self.product_sq)


class TrigReport(_Frozen):
    mean_sin: float
    mean_cos: float
    second_sin: float
    second_cos: float
    var_sin: float = Field(..., ge=0)
    var_cos: float = Field(..., ge=0)
    sin_relation_residual: float
    cos_relation_residual: float


# ============================
# Closed forms
# ============================

class ExpFamilyEval(_Frozen):
    alpha: float
    var_phi: float
    var_lz: float
    product_sq: float
    g_value: float
    dilog_value: float
    xi: float
    mean_cos: float
    mean_cos2: float
    var_sin: float
    var_cos: float
    state_bound: float


class ExpansionFit(_Frozen):
    alphas: List[float]
    # least-squares cubic fits, lowest order first
    g_coefficients: List[float]
    dilog_coefficients: List[float]
    g_expected: List[float]
    dilog_expected: List[float]


class PolyFamilyEval(_Frozen):
    alpha: float
    var_lz: float
    var_phi: float
    norm_sq: float
    product_sq: float
    state_bound: float
    cutoff: int


# ============================
# Oracle comparison
# ============================

class ComparisonStatus(str, Enum):
    passed = "pass"
    failed = "fail"
    not_applicable = "n/a"


class ComparisonRow(_Frozen):
    quantity: str
    series: Optional[float] = None
    quadrature: Optional[float] = None
    abs_diff: Optional[float] = None
    status: ComparisonStatus
    note: str = ""


class ComparisonReport(_Frozen):
    family_name: str
    alpha: float
    cutoff: int
    tol: float
    rows: List[ComparisonRow]

    @property
    def passed(self) -> bool:
        return all(r.status != ComparisonStatus.failed for r in self.rows)


# ============================
# Analysis
# ============================

class Verdict(str, Enum):
    dominant = "dominant"
    no_unique_dominant = "no_unique_dominant"
    inconclusive = "inconclusive"


class DominanceVerdict(_Frozen):
    dominant_index: Optional[int] = None
    candidate_index: Optional[int] = None
    verdict: Verdict
    grid: List[float]
    # n -> |C_n(α)/C_k(α)| along the grid
    ratio_trace: Dict[int, List[float]]
    threshold: float
    notes: str = ""


class ConditionResult(_Frozen):
    passed: bool
    value: float
    detail: str = ""


class OrderingResult(_Frozen):
    strict: bool
    nonstrict: bool
    strict_chain: List[float]
    nonstrict_chain: List[float]

    @property
    def passed(self) -> bool:
        return self.nonstrict


class AdmissibilityReport(_Frozen):
    grid: List[float]
    kappa: float
    scan_n: int
    eps: float
    cond_i: ConditionResult
    cond_ii: ConditionResult
    cond_iii: OrderingResult
    var_phi: List[float]
    tails: List[float]
    notes: str = ""

    @property
    def admissible(self) -> bool:
        return self.cond_i.passed and self.cond_ii.passed and self.cond_iii.passed


class SweepRow(_Frozen):
    alpha: float
    var_phi: Optional[float] = None
    var_lz: Optional[float] = None
    product: Optional[float] = None
    hr_bound: float = 0.5
    state_bound: Optional[float] = None
    status: Literal["ok", "div"] = "ok"


class SweepTable(_Frozen):
    family_name: str
    scale: str
    rows: List[SweepRow]
    provenance: Dict[str, str] = Field(default_factory=dict)

    @property
    def has_divergent(self) -> bool:
        return any(r.status == "div" for r in self.rows)


class AlphaStarResult(_Frozen):
    alpha: float
    product: float
    evaluations: int


class CrossingResult(_Frozen):
    alpha: float
    product: float
    target: float
    bracket: List[float]


class AsymptoticLaw(_Frozen):
    name: str
    alphas: List[float]
    values: List[float]
    limit: float
    deviations: List[float]
    scaled: List[float]
    fitted_coefficient: float
    bound: float
    passed: bool


class AsymptoticReport(_Frozen):
    regime: Literal["small_alpha", "large_alpha"]
    laws: List[AsymptoticLaw]

    @property
    def passed(self) -> bool:
        return all(law.passed for law in self.laws)


class LowerBoundReport(_Frozen):
    grid: List[float]
    k: int
    kappa: float
    big_k: float
    bound: float
    min_product_sq: float
    passed: bool
