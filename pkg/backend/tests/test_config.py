# backend/tests/test_config.py
import pytest
from pydantic import ValidationError

from app.config import Settings, get_settings
from app.errors import InvalidParameter


def test_defaults():
    s = get_settings()
    assert s.rel_tol == 1e-12
    assert s.n_max == 2_000_000
    assert s.quad_tol == 1e-10
    assert s.log_level == "WARNING"
    assert 1 <= s.threads <= 8


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("UNC_LAB_THREADS", "3")
    monkeypatch.setenv("UNC_LAB_REL_TOL", "1e-9")
    monkeypatch.setenv("UNC_LAB_LOG_LEVEL", "DEBUG")
    get_settings.cache_clear()
    s = get_settings()
    assert s.threads == 3
    assert s.rel_tol == 1e-9
    assert s.log_level == "DEBUG"


def test_blank_values_fall_back_to_defaults(monkeypatch):
    monkeypatch.setenv("UNC_LAB_N_MAX", "  ")
    assert Settings.from_env().n_max == 2_000_000


@pytest.mark.parametrize(
    "name, value",
    [("THREADS", "0"), ("REL_TOL", "1.5"), ("N_MAX", "many"), ("QUAD_MAX_EVALS", "10")],
)
def test_bad_values_name_the_variable(monkeypatch, name, value):
    monkeypatch.setenv(f"UNC_LAB_{name}", value)
    with pytest.raises(InvalidParameter, match="UNC_LAB_"):
        Settings.from_env()


def test_dotenv_file(monkeypatch, tmp_path):
    env = tmp_path / ".env"
    env.write_text("UNC_LAB_N_MAX=4096\n", encoding="utf-8")
    # registered so teardown removes what load_dotenv writes
    monkeypatch.setenv("UNC_LAB_N_MAX", "placeholder")
    monkeypatch.delenv("UNC_LAB_N_MAX")
    monkeypatch.setattr("app.config.ENV_PATH", env)
    get_settings.cache_clear()
    assert get_settings().n_max == 4096


def test_settings_are_frozen():
    with pytest.raises(ValidationError):
        get_settings().rel_tol = 1e-3
