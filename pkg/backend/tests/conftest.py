# backend/tests/conftest.py
import math

import numpy as np
import pytest
from hypothesis import strategies as st

from app.config import get_settings
from app.models import TailKind, TruncatedSpectrum


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Every test starts from default settings, untouched by a local .env."""
    for name in ("THREADS", "REL_TOL", "N_MAX", "QUAD_TOL", "QUAD_MAX_EVALS", "LOG_LEVEL"):
        monkeypatch.delenv(f"UNC_LAB_{name}", raising=False)
    monkeypatch.setattr("app.config.ENV_PATH", "/nonexistent/.env")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def spectrum_from(coeffs, name: str = "fixture", alpha: float = 1.0) -> TruncatedSpectrum:
    """Wrap an explicit window C_{-N..N} as a spectrum (no tail)."""
    c = np.asarray(coeffs, dtype=np.complex128)
    assert c.size % 2 == 1
    mass = math.fsum(np.abs(c) ** 2)
    real = bool(np.all(c.imag == 0.0))
    return TruncatedSpectrum(
        family_name=name,
        alpha=alpha,
        cutoff=c.size // 2,
        coeffs=c,
        norm_sq=1.0 / (2.0 * math.pi * mass),
        mass=mass,
        tail_bound=0.0,
        tail_kind=TailKind.exact,
        is_real=real,
        is_symmetric=bool(np.allclose(np.abs(c), np.abs(c[::-1]))),
    )


_unit = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)


@st.composite
def complex_windows(draw, max_cutoff: int = 8):
    """Random complex C_{-N..N}, N <= max_cutoff, with a non-negligible mass."""
    cutoff = draw(st.integers(min_value=1, max_value=max_cutoff))
    parts = draw(st.lists(st.tuples(_unit, _unit), min_size=2 * cutoff + 1, max_size=2 * cutoff + 1))
    c = np.array([complex(re, im) for re, im in parts])
    # keep the normalisation away from zero
    c[cutoff] += 2.0
    return c
