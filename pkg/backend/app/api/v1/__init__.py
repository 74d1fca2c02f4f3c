# backend/app/api/v1/__init__.py
from fastapi import APIRouter
from .routes_sweep import router as sweep_router
from .routes_analysis import router as analysis_router


api_v1 = APIRouter(prefix="/api/v1")
api_v1.include_router(sweep_router, tags=["sweeps"])
api_v1.include_router(analysis_router, prefix="/analysis", tags=["analysis"])
