# backend/app/api/v1/routes_analysis.py
from typing import Any, Dict, Optional

from fastapi import APIRouter, Depends, Query

from app.core import analysis
from app.core.closed_forms import exp_closed, expansion_fit, poly_closed
from app.core.moments import trig_report, uncertainty_report
from app.core.oracle import compare_report
from app.core.spectrum import build_spectrum
from app.deps import get_family, http_error
from app.errors import UncertaintyLabError
from app.models import (
    AlphaStarResult,
    AsymptoticReport,
    CoefficientFamily,
    CrossingResult,
    ExpansionFit,
    ExpFamilyEval,
    LowerBoundReport,
    PolyFamilyEval,
)

router = APIRouter()


def _grid(family: CoefficientFamily, alpha_min: Optional[float], alpha_max: Optional[float], points: int):
    default = analysis.default_check_grid(family, points)
    if alpha_min is None and alpha_max is None:
        return default
    return analysis.make_grid(alpha_min or default[0], alpha_max or default[-1], points, "log")


# ============================
# Closed forms
# ============================

@router.get("/closed-forms/exp", summary="Exponential family in closed form", response_model=ExpFamilyEval)
def closed_exp(alpha: float = Query(..., gt=0)):
    try:
        return exp_closed(alpha)
    except UncertaintyLabError as e:
        raise http_error(e)


@router.get("/closed-forms/exp/expansion-fit", summary="Small-alpha fits of g and Li2", response_model=ExpansionFit)
def closed_exp_fit():
    return expansion_fit()


@router.get("/closed-forms/poly", summary="Polynomial family via zeta values", response_model=PolyFamilyEval)
def closed_poly(alpha: float = Query(..., gt=0), rel_tol: Optional[float] = Query(None, gt=0, lt=1)):
    try:
        return poly_closed(alpha, rel_tol=rel_tol)
    except UncertaintyLabError as e:
        raise http_error(e)


# ============================
# Per-state reports
# ============================

@router.get("/{family}/report", summary="All moments of one state")
def state_report(
    family: CoefficientFamily = Depends(get_family),
    alpha: float = Query(..., gt=0),
    rel_tol: Optional[float] = Query(None, gt=0, lt=1),
) -> Dict[str, Any]:
    try:
        s = build_spectrum(family, alpha, rel_tol=rel_tol)
        moments = uncertainty_report(s)
        trig = trig_report(s)
    except UncertaintyLabError as e:
        raise http_error(e)
    return {
        "family": family.name,
        "alpha": alpha,
        "cutoff": s.cutoff,
        "norm_sq": s.norm_sq,
        "tail_kind": s.tail_kind.value,
        "moments": {**moments.model_dump(mode="json"), "product": moments.product},
        "trig": trig.model_dump(mode="json"),
    }


@router.get("/{family}/verify", summary="Series moments against quadrature")
def verify_state(
    family: CoefficientFamily = Depends(get_family),
    alpha: float = Query(..., gt=0),
    tol: float = Query(1e-8, gt=0),
    rel_tol: float = Query(1e-6, gt=0, lt=1),
    quad_tol: Optional[float] = Query(None, gt=0),
) -> Dict[str, Any]:
    try:
        s = build_spectrum(family, alpha, rel_tol=rel_tol)
        rep = compare_report(s, tol, quad_tol=quad_tol)
    except UncertaintyLabError as e:
        raise http_error(e)
    return {**rep.model_dump(mode="json"), "passed": rep.passed}


# ============================
# Family-level checks
# ============================

@router.get("/{family}/check", summary="Admissibility and dominance over an alpha grid")
def check_family(
    family: CoefficientFamily = Depends(get_family),
    alpha_min: Optional[float] = Query(None, gt=0),
    alpha_max: Optional[float] = Query(None, gt=0),
    points: int = Query(16, ge=8, le=200),
    kappa: float = Query(0.1, gt=0),
    cutoff: int = Query(50, ge=1),
    eps: float = Query(1.0, gt=0),
    n_scan: int = Query(8, ge=1),
) -> Dict[str, Any]:
    try:
        grid = _grid(family, alpha_min, alpha_max, points)
        dominance = analysis.check_dominance(family, grid, n_scan=n_scan)
        admissibility = analysis.check_admissibility(family, grid, kappa, cutoff, eps)
    except UncertaintyLabError as e:
        raise http_error(e)
    return {
        "family": family.name,
        "admissibility": admissibility.model_dump(mode="json"),
        "admissible": admissibility.admissible,
        "dominance": dominance.model_dump(mode="json"),
    }


@router.get("/{family}/lower-bound", summary="kappa/(1+K) against the observed products", response_model=LowerBoundReport)
def lower_bound(
    family: CoefficientFamily = Depends(get_family),
    alpha_min: Optional[float] = Query(None, gt=0),
    alpha_max: Optional[float] = Query(None, gt=0),
    points: int = Query(16, ge=1, le=200),
    n_scan: int = Query(8, ge=1),
):
    try:
        grid = _grid(family, alpha_min, alpha_max, points)
        return analysis.lower_bound_check(family, grid, n_scan=n_scan)
    except UncertaintyLabError as e:
        raise http_error(e)


@router.get("/{family}/asymptotics", summary="Small/large alpha laws", response_model=AsymptoticReport)
def asymptotics(
    family: CoefficientFamily = Depends(get_family),
    regime: str = Query("small_alpha", pattern="^(small_alpha|large_alpha)$"),
):
    try:
        return analysis.asymptotic_check(family, regime)
    except UncertaintyLabError as e:
        raise http_error(e)


# ============================
# Searches
# ============================

@router.get("/{family}/crossing", summary="alpha where the product crosses a target", response_model=CrossingResult)
def crossing(
    family: CoefficientFamily = Depends(get_family),
    target: float = Query(0.5),
):
    try:
        return analysis.find_bound_crossing(family, target)
    except UncertaintyLabError as e:
        raise http_error(e)


@router.get("/{family}/alpha-star", summary="Some alpha with product below epsilon", response_model=AlphaStarResult)
def alpha_star(
    family: CoefficientFamily = Depends(get_family),
    epsilon: float = Query(..., gt=0),
    hint: float = Query(1.0, gt=0),
):
    try:
        return analysis.find_alpha_star(family, epsilon, alpha_hint=hint)
    except UncertaintyLabError as e:
        raise http_error(e)
