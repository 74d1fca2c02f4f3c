# backend/app/deps.py
import math

from fastapi import HTTPException, Query

from app.core.families import BUILTIN_NAMES, builtin_family
from app.errors import (
    DegenerateState,
    DivergentMoment,
    InvalidParameter,
    NoBracket,
    NonConvergent,
    NotAttainable,
    ToleranceNotMet,
    UncertaintyLabError,
)
from app.models import CoefficientFamily


def get_family(family: str, mode: int = Query(0, description="mode index m for the 'single' family")) -> CoefficientFamily:
    """
    Path dependency: resolve a built-in family by name.
    Custom families are file based and only reachable from the CLI.
    """
    if family not in BUILTIN_NAMES:
        raise HTTPException(
            status_code=404,
            detail=f"Unknown family '{family}'. Built-ins: {', '.join(BUILTIN_NAMES)}",
        )
    return builtin_family(family, mode=mode)


def http_error(e: UncertaintyLabError) -> HTTPException:
    """Map a domain error to the HTTP status the routes answer with."""
    if isinstance(e, (NotAttainable, NoBracket)):
        return HTTPException(status_code=409, detail={"error": type(e).__name__, "message": str(e), **_extra(e)})
    if isinstance(e, (InvalidParameter, DivergentMoment, NonConvergent, DegenerateState, ToleranceNotMet)):
        return HTTPException(status_code=422, detail={"error": type(e).__name__, "message": str(e)})
    return HTTPException(status_code=400, detail={"error": type(e).__name__, "message": str(e)})


def _extra(e: UncertaintyLabError) -> dict:
    if isinstance(e, NotAttainable):
        # JSON has no inf; an all-divergent search reports null
        infimum = e.best_product if math.isfinite(e.best_product) else None
        return {"best_alpha": e.best_alpha, "infimum": infimum}
    if isinstance(e, NoBracket):
        return {"lo": e.lo, "hi": e.hi, "target": e.target}
    return {}
