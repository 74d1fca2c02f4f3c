# backend/app/api/v1/routes_sweep.py
from typing import List, Optional

from fastapi import APIRouter, Depends, Query
from pydantic import BaseModel, Field
from starlette.responses import StreamingResponse

from app.core import analysis
from app.core.families import BUILTIN_NAMES, builtin_family
from app.deps import get_family, http_error
from app.errors import UncertaintyLabError
from app.export import iter_sweep_csv
from app.models import CoefficientFamily, SweepTable

router = APIRouter()

# ============================
# Schemas
# ============================

class FamilyOut(BaseModel):
    name: str
    description: str
    is_real: bool
    is_symmetric: bool
    support: Optional[int] = Field(None, description="Largest |n| with a nonzero coefficient, if finite")


def _table(
    family: CoefficientFamily,
    alpha_min: float,
    alpha_max: float,
    steps: int,
    scale: str,
    rel_tol: Optional[float],
) -> SweepTable:
    try:
        grid = analysis.make_grid(alpha_min, alpha_max, steps, scale)
        return analysis.sweep(family, grid, keep_going=True, rel_tol=rel_tol, scale=scale)
    except UncertaintyLabError as e:
        raise http_error(e)


# ============================
# Routes
# ============================

@router.get("/families", summary="List built-in coefficient families", response_model=List[FamilyOut])
def list_families():
    out = []
    for name in BUILTIN_NAMES:
        f = builtin_family(name)
        out.append(
            FamilyOut(
                name=f.name,
                description=f.description,
                is_real=f.is_real,
                is_symmetric=f.is_symmetric,
                support=f.support,
            )
        )
    return out


@router.get("/sweep/{family}", summary="Sweep sigma_phi^2, sigma_Lz^2 over an alpha range", response_model=SweepTable)
def sweep_family(
    family: CoefficientFamily = Depends(get_family),
    alpha_min: float = Query(..., gt=0),
    alpha_max: float = Query(..., gt=0),
    steps: int = Query(50, ge=2, le=5000),
    scale: str = Query("linear", pattern="^(linear|log)$"),
    rel_tol: Optional[float] = Query(None, gt=0, lt=1),
):
    """
    Sweep a built-in family.

    - Divergent sigma_Lz rows come back with status "div" and null values.
    - Provenance (family, scale, rel_tol, cutoff range, version) rides along.
    """
    return _table(family, alpha_min, alpha_max, steps, scale, rel_tol)


@router.get("/sweep/{family}/export.csv", summary="Export a sweep as CSV")
def export_sweep_csv(
    family: CoefficientFamily = Depends(get_family),
    alpha_min: float = Query(..., gt=0),
    alpha_max: float = Query(..., gt=0),
    steps: int = Query(50, ge=2, le=5000),
    scale: str = Query("linear", pattern="^(linear|log)$"),
    rel_tol: Optional[float] = Query(None, gt=0, lt=1),
    provenance: bool = True,
):
    """Same columns and number format as `unc-lab sweep`."""
    table = _table(family, alpha_min, alpha_max, steps, scale, rel_tol)
    return StreamingResponse(
        iter_sweep_csv(table, provenance=provenance),
        media_type="text/csv",
        headers={"Content-Disposition": f"attachment; filename=sweep_{table.family_name}.csv"},
    )
