# backend/app/cli.py
"""
unc-lab command line.

Exit codes:
  0 ok / dominant
  1 invalid input (or any other domain error)
  2 divergent moment rows
  3 no unique dominant index
  4 dominance inconclusive
  5 search failed (NotAttainable / NoBracket)
  6 series/quadrature verification failed
"""
import json
import sys
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from app.config import get_settings
from app.core import analysis
from app.core.families import resolve_family
from app.core.moments import phi_moments, trig_report, uncertainty_report
from app.core.oracle import compare_report
from app.core.spectrum import build_spectrum
from app.errors import (
    DivergentMoment,
    InvalidParameter,
    NoBracket,
    NotAttainable,
    UncertaintyLabError,
)
from app.export import sweep_csv_text
from app.logging_config import configure_logging
from app.models import ComparisonStatus, Verdict

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_DIVERGENT = 2
EXIT_NO_UNIQUE = 3
EXIT_INCONCLUSIVE = 4
EXIT_SEARCH = 5
EXIT_VERIFY = 6

FAMILY_CHOICES = ("exp", "exp0", "poly", "single", "two", "custom")

app = typer.Typer(name="unc-lab", help="Angle / angular-momentum uncertainty products.",
                  no_args_is_help=True, add_completion=False)
console = Console()
err_console = Console(stderr=True)


@app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING, ..."),
):
    try:
        level = log_level or get_settings().log_level
    except InvalidParameter as e:
        _fail(str(e), EXIT_INVALID)
    configure_logging(level)


def _fail(message: str, code: int) -> None:
    err_console.print(f"[red]error:[/red] {escape(message)}")
    raise typer.Exit(code)


def _family(family: str, mode: int, spec: Optional[Path]):
    if family not in FAMILY_CHOICES:
        _fail(f"unknown family '{family}' (choose from {', '.join(FAMILY_CHOICES)})", EXIT_INVALID)
    try:
        return resolve_family(family, spec_path=spec, mode=mode)
    except UncertaintyLabError as e:
        _fail(str(e), EXIT_INVALID)


def _emit_json(payload) -> None:
    typer.echo(json.dumps(payload, indent=2))


FamilyOpt = typer.Option("exp", "--family", "-f", help="exp, exp0, poly, single, two or custom")
ModeOpt = typer.Option(0, "--mode", help="mode index m for --family single")
SpecOpt = typer.Option(None, "--spec", help="JSON/YAML file for --family custom")
JsonOpt = typer.Option(False, "--json", help="machine-readable output")


# ============================
# sweep
# ============================

@app.command("sweep")
def cmd_sweep(
    family: str = FamilyOpt,
    mode: int = ModeOpt,
    spec: Optional[Path] = SpecOpt,
    alpha_min: float = typer.Option(..., "--min"),
    alpha_max: float = typer.Option(..., "--max"),
    steps: int = typer.Option(100, "--steps"),
    scale: str = typer.Option("linear", "--scale", help="linear or log"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="CSV path (stdout if omitted)"),
    keep_going: bool = typer.Option(False, "--keep-going", help="write 'div' rows instead of aborting"),
    no_provenance: bool = typer.Option(False, "--no-provenance"),
    rel_tol: Optional[float] = typer.Option(None, "--rel-tol"),
):
    """σ_φ², σ_Lz² and σ_φσ_Lz over an α range, as CSV."""
    fam = _family(family, mode, spec)
    try:
        grid = analysis.make_grid(alpha_min, alpha_max, steps, scale)
        table = analysis.sweep(fam, grid, keep_going=True, rel_tol=rel_tol, scale=scale)
    except UncertaintyLabError as e:
        _fail(str(e), EXIT_INVALID)

    if table.has_divergent and not keep_going:
        first = next(r.alpha for r in table.rows if r.status == "div")
        _fail(f"sigma_Lz diverges at alpha={first:g} (use --keep-going to write 'div' rows)",
              EXIT_DIVERGENT)

    text = sweep_csv_text(table, provenance=not no_provenance)
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        err_console.print(f"wrote {len(table.rows)} rows to {out}")

    if table.has_divergent:
        raise typer.Exit(EXIT_DIVERGENT)


# ============================
# check
# ============================

@app.command("check")
def cmd_check(
    family: str = FamilyOpt,
    mode: int = ModeOpt,
    spec: Optional[Path] = SpecOpt,
    alpha_min: Optional[float] = typer.Option(None, "--min"),
    alpha_max: Optional[float] = typer.Option(None, "--max"),
    points: int = typer.Option(16, "--points"),
    kappa: float = typer.Option(0.1, "--kappa"),
    cutoff: int = typer.Option(50, "--cutoff", "-N", help="cutoff N for conditions (ii) and (iii)"),
    eps: float = typer.Option(1.0, "--eps"),
    n_scan: int = typer.Option(8, "--n-scan"),
    as_json: bool = JsonOpt,
):
    """Admissibility conditions and the dominance verdict over an α grid."""
    fam = _family(family, mode, spec)
    try:
        if alpha_min is None and alpha_max is None:
            grid = analysis.default_check_grid(fam, points)
        else:
            default = analysis.default_check_grid(fam, points)
            grid = analysis.make_grid(alpha_min or default[0], alpha_max or default[-1], points, "log")
        dominance = analysis.check_dominance(fam, grid, n_scan=n_scan)
        admissibility = analysis.check_admissibility(fam, grid, kappa, cutoff, eps)
    except DivergentMoment as e:
        _fail(str(e), EXIT_DIVERGENT)
    except UncertaintyLabError as e:
        _fail(str(e), EXIT_INVALID)

    if as_json:
        _emit_json({
            "family": fam.name,
            "admissibility": admissibility.model_dump(mode="json"),
            "admissible": admissibility.admissible,
            "dominance": dominance.model_dump(mode="json"),
        })
    else:
        table = Table(title=f"admissibility of '{fam.name}'")
        table.add_column("condition")
        table.add_column("result")
        table.add_column("detail")
        table.add_row("(i) nontrivial angle variance", _mark(admissibility.cond_i.passed),
                      f"{admissibility.cond_i.detail} (kappa={kappa:g})")
        table.add_row("(ii) uniform L_z tail", _mark(admissibility.cond_ii.passed),
                      f"{admissibility.cond_ii.detail} (eps={eps:g})")
        order = admissibility.cond_iii
        table.add_row("(iii) monotone subsequence", _mark(order.passed),
                      f"strict: {_mark(order.strict)}, non-strict: {_mark(order.nonstrict)}")
        console.print(table)
        if admissibility.notes:
            console.print(admissibility.notes)
        console.print(_verdict_line(dominance))

    codes = {
        Verdict.dominant: EXIT_OK,
        Verdict.no_unique_dominant: EXIT_NO_UNIQUE,
        Verdict.inconclusive: EXIT_INCONCLUSIVE,
    }
    raise typer.Exit(codes[dominance.verdict])


def _mark(ok: bool) -> str:
    return "pass" if ok else "fail"


def _verdict_line(d) -> str:
    if d.verdict == Verdict.dominant:
        return f"dominant k={d.dominant_index}"
    if d.verdict == Verdict.no_unique_dominant:
        k = abs(d.candidate_index)
        label = f"±{k}" if k else "0"
        return f"no unique dominant ({label})"
    return f"inconclusive ({d.notes})"


# ============================
# searches
# ============================

@app.command("crossing")
def cmd_crossing(
    family: str = FamilyOpt,
    mode: int = ModeOpt,
    spec: Optional[Path] = SpecOpt,
    target: float = typer.Option(0.5, "--target"),
    as_json: bool = JsonOpt,
):
    """α where σ_φσ_Lz crosses --target."""
    fam = _family(family, mode, spec)
    try:
        res = analysis.find_bound_crossing(fam, target)
    except NoBracket as e:
        if as_json:
            _emit_json({"family": fam.name, "error": "no_bracket", "lo": e.lo, "hi": e.hi, "target": e.target})
        _fail(str(e), EXIT_SEARCH)
    except UncertaintyLabError as e:
        _fail(str(e), EXIT_INVALID)

    if as_json:
        _emit_json({"family": fam.name, **res.model_dump(mode="json")})
    else:
        console.print(f"alpha = {res.alpha:.9g}  product = {res.product:.9g}  "
                      f"(target {res.target:g}, bracket [{res.bracket[0]:.6g}, {res.bracket[1]:.6g}])")


@app.command("alpha-star")
def cmd_alpha_star(
    family: str = FamilyOpt,
    mode: int = ModeOpt,
    spec: Optional[Path] = SpecOpt,
    epsilon: float = typer.Option(..., "--epsilon"),
    hint: float = typer.Option(1.0, "--hint"),
    as_json: bool = JsonOpt,
):
    """Some α* with σ_φσ_Lz(α*) < ε, or the infimum seen when none exists."""
    fam = _family(family, mode, spec)
    try:
        res = analysis.find_alpha_star(fam, epsilon, alpha_hint=hint)
    except NotAttainable as e:
        if as_json:
            _emit_json({"family": fam.name, "error": "not_attainable",
                        "best_alpha": e.best_alpha, "infimum": e.best_product})
        else:
            console.print(f"not attainable: infimum = {e.best_product:.9g} at alpha = {e.best_alpha}")
        raise typer.Exit(EXIT_SEARCH)
    except UncertaintyLabError as e:
        _fail(str(e), EXIT_INVALID)

    if as_json:
        _emit_json({"family": fam.name, **res.model_dump(mode="json")})
    else:
        console.print(f"alpha* = {res.alpha:.9g}  product = {res.product:.9g}  ({res.evaluations} evaluations)")


# ============================
# verify / report
# ============================

@app.command("verify")
def cmd_verify(
    family: str = FamilyOpt,
    mode: int = ModeOpt,
    spec: Optional[Path] = SpecOpt,
    alpha: float = typer.Option(..., "--alpha"),
    tol: float = typer.Option(1e-8, "--tol"),
    rel_tol: float = typer.Option(1e-6, "--rel-tol", help="window size; both sides use the same window"),
    quad_tol: Optional[float] = typer.Option(None, "--quad-tol"),
    as_json: bool = JsonOpt,
):
    """Series moments against adaptive quadrature of the explicit state."""
    fam = _family(family, mode, spec)
    try:
        s = build_spectrum(fam, alpha, rel_tol=rel_tol)
        rep = compare_report(s, tol, quad_tol=quad_tol)
    except UncertaintyLabError as e:
        _fail(str(e), EXIT_INVALID)

    if as_json:
        _emit_json({**rep.model_dump(mode="json"), "passed": rep.passed})
    else:
        table = Table(title=f"{fam.name} alpha={alpha:g} N={s.cutoff} tol={tol:g}")
        for col in ("quantity", "series", "quadrature", "|diff|", "status", "note"):
            table.add_column(col)
        for r in rep.rows:
            table.add_row(
                r.quantity,
                "-" if r.series is None else f"{r.series:.15g}",
                "-" if r.quadrature is None else f"{r.quadrature:.15g}",
                "-" if r.abs_diff is None else f"{r.abs_diff:.2e}",
                r.status.value,
                r.note,
            )
        console.print(table)

    if any(r.status == ComparisonStatus.failed for r in rep.rows):
        raise typer.Exit(EXIT_VERIFY)


@app.command("report")
def cmd_report(
    family: str = FamilyOpt,
    mode: int = ModeOpt,
    spec: Optional[Path] = SpecOpt,
    alpha: float = typer.Option(..., "--alpha"),
    rel_tol: Optional[float] = typer.Option(None, "--rel-tol"),
    as_json: bool = JsonOpt,
):
    """All moments and trig relations for one state."""
    fam = _family(family, mode, spec)
    try:
        s = build_spectrum(fam, alpha, rel_tol=rel_tol)
    except UncertaintyLabError as e:
        _fail(str(e), EXIT_INVALID)
    try:
        trig = trig_report(s)
        moments = uncertainty_report(s)
    except DivergentMoment as e:
        mean_phi, _, var_phi = phi_moments(s)
        if as_json:
            _emit_json({"family": fam.name, "alpha": alpha, "cutoff": s.cutoff,
                        "mean_phi": mean_phi, "var_phi": var_phi, "error": "divergent_moment"})
        _fail(str(e), EXIT_DIVERGENT)
    except UncertaintyLabError as e:
        _fail(str(e), EXIT_INVALID)

    if as_json:
        _emit_json({
            "family": fam.name,
            "alpha": alpha,
            "cutoff": s.cutoff,
            "norm_sq": s.norm_sq,
            "moments": {**moments.model_dump(mode="json"), "product": moments.product},
            "trig": trig.model_dump(mode="json"),
        })
        return

    table = Table(title=f"{fam.name} alpha={alpha:g} N={s.cutoff} (hbar = 1)")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    for name, value in moments.model_dump().items():
        table.add_row(name, f"{value:.12g}")
    table.add_row("product", f"{moments.product:.12g}")
    for name, value in trig.model_dump().items():
        table.add_row(name, f"{value:.12g}")
    console.print(table)


if __name__ == "__main__":
    app()
