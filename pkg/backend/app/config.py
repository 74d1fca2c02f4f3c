# backend/app/config.py
import os
from functools import lru_cache
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.errors import InvalidParameter

# Optional .env next to the backend folder (same spot the old sqlite file lived)
BASE_DIR = Path(__file__).resolve().parent.parent
ENV_PATH = BASE_DIR / ".env"

ENV_PREFIX = "UNC_LAB_"


def _default_threads() -> int:
    return max(1, min(8, os.cpu_count() or 1))


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    threads: int = Field(default_factory=_default_threads, ge=1)
    rel_tol: float = Field(1e-12, gt=0, lt=1)
    n_max: int = Field(2_000_000, ge=1)
    quad_tol: float = Field(1e-10, gt=0)
    quad_max_evals: int = Field(2_000_000, ge=100)
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "Settings":
        """
        Build settings from UNC_LAB_* variables.

        - Unset variables fall back to the defaults above.
        - Bad values raise InvalidParameter naming the variable.
        """
        raw = {}
        for name in cls.model_fields:
            value = os.getenv(f"{ENV_PREFIX}{name.upper()}")
            if value is not None and value.strip() != "":
                raw[name] = value.strip()
        try:
            return cls(**raw)
        except ValidationError as e:
            raise InvalidParameter(f"Invalid {ENV_PREFIX}* setting: {e}") from e


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    load_dotenv(ENV_PATH, override=False)
    return Settings.from_env()
