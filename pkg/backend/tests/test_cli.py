# backend/tests/test_cli.py
import json
import math

import pytest
from typer.testing import CliRunner

from app.cli import (
    EXIT_DIVERGENT,
    EXIT_INCONCLUSIVE,
    EXIT_INVALID,
    EXIT_NO_UNIQUE,
    EXIT_OK,
    EXIT_SEARCH,
    EXIT_VERIFY,
    app,
)
from app.core.closed_forms import exp_closed
from app.export import CSV_COLUMNS

runner = CliRunner()

PI_SQ_3 = math.pi ** 2 / 3.0


def _csv_body(text: str):
    return [line for line in text.splitlines() if not line.startswith("#")]


# ============================
# sweep
# ============================

def test_sweep_to_stdout():
    result = runner.invoke(app, ["sweep", "--family", "exp", "--min", "1", "--max", "2", "--steps", "3",
                                 "--no-provenance"])
    assert result.exit_code == EXIT_OK, result.output
    lines = result.stdout.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 4
    cells = lines[1].split(",")
    assert cells[0] == "1"
    assert cells[1] == format(exp_closed(1.0).var_phi, ".17g")
    assert cells[4] == "0.5"
    assert float(cells[3]) == pytest.approx(math.sqrt(exp_closed(1.0).product_sq), rel=1e-14)


def test_sweep_writes_provenance(tmp_path):
    out = tmp_path / "exp.csv"
    result = runner.invoke(app, ["sweep", "--min", "0.1", "--max", "10", "--steps", "5", "--scale", "log",
                                 "--out", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    text = out.read_text(encoding="utf-8")
    assert text.startswith("# family: exp\n")
    assert "# scale: log\n" in text
    assert "# version: " in text
    assert "\r" not in text
    body = _csv_body(text)
    assert body[0] == ",".join(CSV_COLUMNS)
    assert [float(line.split(",")[0]) for line in body[1:]] == pytest.approx([0.1, 0.316227766, 1.0, 3.16227766, 10.0])


def test_sweep_divergence_aborts_without_keep_going(tmp_path):
    out = tmp_path / "poly.csv"
    result = runner.invoke(app, ["sweep", "--family", "poly", "--min", "1.2", "--max", "2", "--steps", "3",
                                 "--rel-tol", "1e-8", "--out", str(out)])
    assert result.exit_code == EXIT_DIVERGENT
    assert "diverges" in result.stderr
    assert not out.exists()


def test_sweep_keep_going_writes_div_rows(tmp_path):
    out = tmp_path / "poly.csv"
    result = runner.invoke(app, ["sweep", "--family", "poly", "--min", "1.2", "--max", "2", "--steps", "3",
                                 "--rel-tol", "1e-8", "--keep-going", "--out", str(out)])
    assert result.exit_code == EXIT_DIVERGENT
    body = _csv_body(out.read_text(encoding="utf-8"))
    assert body[1] == "1.2,div,div,div,0.5,div"
    assert "div" not in body[2]
    assert "div" not in body[3]


def test_polynomial_sweep_at_default_tolerance():
    result = runner.invoke(app, ["sweep", "--family", "poly", "--min", "1.6", "--max", "50", "--steps", "5",
                                 "--no-provenance"])
    assert result.exit_code == EXIT_OK, result.output
    body = _csv_body(result.stdout)[1:]
    assert len(body) == 5
    assert all("div" not in line for line in body)
    assert min(float(line.split(",")[3]) for line in body) >= 1.85


@pytest.mark.parametrize(
    "args",
    [
        ["sweep", "--family", "gauss", "--min", "1", "--max", "2"],
        ["sweep", "--family", "custom", "--min", "1", "--max", "2"],
        ["sweep", "--min", "2", "--max", "1"],
        ["sweep", "--min", "1", "--max", "2", "--scale", "cubic"],
        ["report", "--family", "exp", "--alpha", "-1"],
        ["crossing", "--target", "inf"],
    ],
)
def test_invalid_input_exits_one(args):
    result = runner.invoke(app, args)
    assert result.exit_code == EXIT_INVALID
    assert "error" in result.stderr


def test_bad_setting_exits_one(monkeypatch):
    monkeypatch.setenv("UNC_LAB_REL_TOL", "often")
    result = runner.invoke(app, ["report", "--alpha", "1"])
    assert result.exit_code == EXIT_INVALID
    assert "UNC_LAB_" in result.stderr


# ============================
# check
# ============================

def test_check_exponential_is_dominant():
    result = runner.invoke(app, ["check", "--family", "exp"])
    assert result.exit_code == EXIT_OK, result.output
    assert "dominant k=0" in result.stdout


def test_check_polynomial_json():
    result = runner.invoke(app, ["check", "--family", "poly", "--json"])
    assert result.exit_code == EXIT_NO_UNIQUE, result.output
    payload = json.loads(result.stdout)
    assert payload["family"] == "poly"
    assert payload["dominance"]["verdict"] == "no_unique_dominant"
    assert payload["dominance"]["candidate_index"] == 1
    assert payload["admissibility"]["cond_iii"]["nonstrict"] is True


def test_check_no_unique_text():
    result = runner.invoke(app, ["check", "--family", "exp0"])
    assert result.exit_code == EXIT_NO_UNIQUE
    assert "no unique dominant (±1)" in result.stdout


def test_check_inconclusive():
    result = runner.invoke(app, ["check", "--min", "0.5", "--max", "5", "--points", "8"])
    assert result.exit_code == EXIT_INCONCLUSIVE
    assert "inconclusive" in result.stdout


# ============================
# searches
# ============================

def test_crossing_json():
    result = runner.invoke(app, ["crossing", "--family", "exp", "--target", "0.5", "--json"])
    assert result.exit_code == EXIT_OK, result.output
    payload = json.loads(result.stdout)
    assert payload["alpha"] == pytest.approx(1.29639, abs=5e-4)
    assert payload["product"] == pytest.approx(0.5, abs=1e-5)


def test_crossing_without_bracket():
    result = runner.invoke(app, ["crossing", "--target", "10", "--json"])
    assert result.exit_code == EXIT_SEARCH
    payload = json.loads(result.stdout)
    assert payload["error"] == "no_bracket"
    assert payload["target"] == 10.0


def test_alpha_star_exponential():
    result = runner.invoke(app, ["alpha-star", "--epsilon", "0.1", "--json"])
    assert result.exit_code == EXIT_OK, result.output
    payload = json.loads(result.stdout)
    assert payload["product"] < 0.1


@pytest.mark.slow
def test_alpha_star_polynomial_not_attainable():
    result = runner.invoke(app, ["alpha-star", "--family", "poly", "--epsilon", "1"])
    assert result.exit_code == EXIT_SEARCH
    assert "not attainable" in result.stdout


# ============================
# verify / report
# ============================

def test_verify_two_mode_passes():
    result = runner.invoke(app, ["verify", "--family", "two", "--alpha", "1", "--json"])
    assert result.exit_code == EXIT_OK, result.output
    payload = json.loads(result.stdout)
    assert payload["passed"] is True
    assert {row["status"] for row in payload["rows"]} == {"pass"}


def test_verify_exponential_table():
    result = runner.invoke(app, ["verify", "--family", "exp", "--alpha", "1"])
    assert result.exit_code == EXIT_OK, result.output
    assert "exp alpha=1 N=" in result.stdout


def test_verify_failure_exit_code():
    # no floating-point quadrature matches the series to 1e-30 on every row
    result = runner.invoke(app, ["verify", "--family", "exp", "--alpha", "1", "--tol", "1e-30", "--json"])
    assert result.exit_code == EXIT_VERIFY
    assert json.loads(result.stdout)["passed"] is False


def test_report_json():
    result = runner.invoke(app, ["--log-level", "DEBUG", "report", "--family", "exp", "--alpha", "1", "--json"])
    assert result.exit_code == EXIT_OK, result.output
    payload = json.loads(result.stdout)
    ev = exp_closed(1.0)
    assert payload["moments"]["var_lz"] == pytest.approx(ev.var_lz, rel=1e-10)
    assert payload["moments"]["var_phi"] == pytest.approx(ev.var_phi, rel=1e-8)
    assert payload["moments"]["product"] == pytest.approx(math.sqrt(ev.product_sq), rel=1e-8)
    assert payload["trig"]["mean_cos"] == pytest.approx(ev.mean_cos, rel=1e-10)


def test_report_text_for_eigenstate():
    result = runner.invoke(app, ["report", "--family", "single", "--mode", "2", "--alpha", "1"])
    assert result.exit_code == EXIT_OK, result.output
    assert "mean_lz" in result.stdout


def test_report_divergent_moment():
    result = runner.invoke(app, ["report", "--family", "poly", "--alpha", "1.2", "--rel-tol", "1e-6", "--json"])
    assert result.exit_code == EXIT_DIVERGENT
    payload = json.loads(result.stdout)
    assert payload["error"] == "divergent_moment"
    assert 0.0 < payload["var_phi"] < PI_SQ_3


def test_report_divergent_moment_at_default_tolerance():
    result = runner.invoke(app, ["report", "--family", "poly", "--alpha", "1.2", "--json"])
    assert result.exit_code == EXIT_DIVERGENT
    assert json.loads(result.stdout)["error"] == "divergent_moment"


def test_report_custom_family(tmp_path):
    spec = tmp_path / "pair.json"
    spec.write_text(json.dumps({
        "name": "pair",
        "symmetric": True,
        "real": True,
        "entries": [{"n": 1, "expr": "exp"}, {"n": -1, "expr": "exp"}],
    }), encoding="utf-8")
    result = runner.invoke(app, ["report", "--family", "custom", "--spec", str(spec), "--alpha", "2", "--json"])
    assert result.exit_code == EXIT_OK, result.output
    payload = json.loads(result.stdout)
    assert payload["family"] == "pair"
    assert payload["moments"]["var_lz"] == pytest.approx(1.0, rel=1e-14)
    assert payload["moments"]["var_phi"] == pytest.approx(PI_SQ_3 + 0.5, rel=1e-13)
