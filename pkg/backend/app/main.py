# backend/app/main.py
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app import __version__
from app.api.v1 import api_v1
from app.config import get_settings
from app.logging_config import configure_logging


app = FastAPI(title="Angular Uncertainty Lab API", version=__version__)
configure_logging(get_settings().log_level)


# CORS for local dev notebooks / frontends
origins = [
    "http://localhost:5173",
    "http://127.0.0.1:5173",
    "http://localhost:8888",
]

app.add_middleware(
    CORSMiddleware,
    allow_origins=origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

@app.get("/healthz")
def healthz():
    return {"status": "ok", "version": __version__, "convention": "hbar = 1"}

# Mount all v1 routes
app.include_router(api_v1)
