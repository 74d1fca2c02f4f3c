# backend/app/core/analysis.py
"""
Family-level questions asked over α grids: sweeps, dominance and
admissibility checks, the α* search for arbitrarily small products, the
crossing of a target product, and the asymptotic laws of the exponential
family.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from app import __version__
from app.config import get_settings
from app.core.closed_forms import exp_closed, poly_closed
from app.core.moments import phi_moments, uncertainty_report
from app.core.spectrum import build_spectrum, tail_second_moment
from app.errors import (
    DegenerateState,
    DivergentMoment,
    InvalidParameter,
    NoBracket,
    NonConvergent,
    NotAttainable,
)
from app.models import (
    AdmissibilityReport,
    AlphaStarResult,
    AsymptoticLaw,
    AsymptoticReport,
    CoefficientFamily,
    ConditionResult,
    CrossingResult,
    DominanceVerdict,
    LowerBoundReport,
    OrderingResult,
    SweepRow,
    SweepTable,
    Verdict,
)

logger = logging.getLogger(__name__)

PI_SQ_3 = math.pi ** 2 / 3.0

DOMINANCE_THRESHOLD = 1e-3
# a second index whose tail ratio stays this close to 1 shares the decay
TIE_TOLERANCE = 1e-6
ALPHA_STAR_MAX = 1e4
CROSSING_RANGE = (1e-3, 50.0)
CROSSING_POINTS = 48
CROSSING_XTOL = 1e-6
# stands in for +inf (divergent σ_Lz) inside the bracket scan
DIVERGENT_PRODUCT = 1e300


def _is_builtin(family: CoefficientFamily, name: str) -> bool:
    return family.name == name and family.support is None


# ============================
# Per-α evaluation
# ============================

def _evaluate(family: CoefficientFamily, alpha: float, rel_tol: Optional[float] = None) -> Tuple[SweepRow, Optional[int]]:
    """SweepRow for one α plus the cutoff used (None for the closed form)."""
    if _is_builtin(family, "exp"):
        ev = exp_closed(alpha)
        var_phi, var_lz, bound, cutoff = ev.var_phi, ev.var_lz, ev.state_bound, None
    elif _is_builtin(family, "poly"):
        ev = poly_closed(alpha, rel_tol=rel_tol)
        var_phi, var_lz, bound, cutoff = ev.var_phi, ev.var_lz, ev.state_bound, ev.cutoff
    else:
        s = build_spectrum(family, alpha, rel_tol=rel_tol)
        rep = uncertainty_report(s)
        var_phi, var_lz, bound, cutoff = rep.var_phi, rep.var_lz, rep.state_bound, s.cutoff
    row = SweepRow(
        alpha=alpha,
        var_phi=var_phi,
        var_lz=var_lz,
        product=math.sqrt(var_phi * var_lz),
        state_bound=bound,
    )
    return row, cutoff


def sweep_row(family: CoefficientFamily, alpha: float, rel_tol: Optional[float] = None) -> SweepRow:
    return _evaluate(family, alpha, rel_tol)[0]


def product(family: CoefficientFamily, alpha: float, rel_tol: Optional[float] = None) -> float:
    """σ_φσ_Lz at α (units of ħ)."""
    return sweep_row(family, alpha, rel_tol).product


def _var_phi(family: CoefficientFamily, alpha: float, rel_tol: Optional[float] = None) -> float:
    if _is_builtin(family, "exp"):
        return exp_closed(alpha).var_phi
    return phi_moments(build_spectrum(family, alpha, rel_tol=rel_tol))[2]


def _check_grid(alpha_grid: Sequence[float], min_points: int = 1) -> List[float]:
    grid = [float(a) for a in alpha_grid]
    if len(grid) < min_points:
        raise InvalidParameter(f"alpha grid needs at least {min_points} points, got {len(grid)}")
    if any(not (math.isfinite(a) and a > 0) for a in grid):
        raise InvalidParameter("alpha grid values must be positive numbers")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidParameter("alpha grid must be strictly increasing")
    return grid


def make_grid(alpha_min: float, alpha_max: float, steps: int, scale: str = "linear") -> List[float]:
    if not (0 < alpha_min < alpha_max) or not math.isfinite(alpha_max):
        raise InvalidParameter(f"need 0 < alpha_min < alpha_max, got [{alpha_min}, {alpha_max}]")
    if steps < 2:
        raise InvalidParameter(f"steps must be >= 2, got {steps}")
    if scale == "linear":
        values = np.linspace(alpha_min, alpha_max, steps)
    elif scale == "log":
        values = np.geomspace(alpha_min, alpha_max, steps)
    else:
        raise InvalidParameter(f"scale must be 'linear' or 'log', got {scale!r}")
    return [float(v) for v in values]


def sweep(
    family: CoefficientFamily,
    alphas: Sequence[float],
    keep_going: bool = True,
    rel_tol: Optional[float] = None,
    threads: Optional[int] = None,
    scale: str = "linear",
) -> SweepTable:
    """
    Rows for every α, computed on a thread pool and returned in α order.
    DivergentMoment rows become status 'div' when keep_going, else the first
    one (in α order) is raised.
    """
    grid = _check_grid(alphas, min_points=1)
    settings = get_settings()
    workers = settings.threads if threads is None else threads
    rel_tol = settings.rel_tol if rel_tol is None else rel_tol

    def run(alpha: float):
        try:
            return _evaluate(family, alpha, rel_tol)
        except DivergentMoment as e:
            return e

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(run, grid))

    rows: List[SweepRow] = []
    cutoffs: List[int] = []
    for alpha, result in zip(grid, results):
        if isinstance(result, DivergentMoment):
            if not keep_going:
                raise result
            logger.info("%s alpha=%g: divergent row", family.name, alpha)
            rows.append(SweepRow(alpha=alpha, status="div"))
            continue
        row, cutoff = result
        rows.append(row)
        if cutoff is not None:
            cutoffs.append(cutoff)

    provenance: Dict[str, str] = {
        "family": family.name,
        "scale": scale,
        "rel_tol": f"{rel_tol:g}",
        "n_max": str(settings.n_max),
        "cutoff": f"{min(cutoffs)}..{max(cutoffs)}" if cutoffs else "closed form",
        "version": __version__,
    }
    return SweepTable(family_name=family.name, scale=scale, rows=rows, provenance=provenance)


# ============================
# Dominance
# ============================

def _scan_order(n_scan: int) -> np.ndarray:
    """0, 1, -1, 2, -2, ... so ties resolve to the smallest |n|, positive first."""
    order = [0]
    for n in range(1, n_scan + 1):
        order.extend((n, -n))
    return np.array(order, dtype=np.int64)


def default_check_grid(family: CoefficientFamily, points: int = 16) -> List[float]:
    lo, hi = (2.0, 50.0) if _is_builtin(family, "poly") else (0.5, 20.0)
    return [float(v) for v in np.geomspace(lo, hi, points)]


def check_dominance(
    family: CoefficientFamily,
    alpha_grid: Sequence[float],
    n_scan: int = 8,
    threshold: float = DOMINANCE_THRESHOLD,
) -> DominanceVerdict:
    grid = _check_grid(alpha_grid, min_points=8)
    if grid[-1] < 10.0 * grid[0]:
        raise InvalidParameter("dominance grid must span at least one decade")
    if n_scan < 1:
        raise InvalidParameter(f"n_scan must be >= 1, got {n_scan}")
    if family.support is not None:
        n_scan = max(n_scan, family.support)

    order = _scan_order(n_scan)
    mags = np.array([np.abs(family.coefficients(order, a)) for a in grid])  # (alpha, n)

    pos = int(np.argmax(mags[-1]))
    k = int(order[pos])
    if mags[-1, pos] == 0.0:
        return DominanceVerdict(
            candidate_index=None, verdict=Verdict.inconclusive, grid=grid,
            ratio_trace={}, threshold=threshold,
            notes="all scanned coefficients vanish at the largest alpha",
        )

    ck = mags[:, pos]
    trace: Dict[int, List[float]] = {}
    tails = []
    decaying = True
    third = max(1, len(grid) // 3)
    for idx, n in enumerate(order):
        if idx == pos:
            continue
        ratio = np.divide(mags[:, idx], ck, out=np.full(len(grid), math.inf), where=ck > 0)
        trace[int(n)] = ratio.tolist()
        tails.append(ratio[-1])
        last_max = float(np.max(ratio[-third:]))
        if not (last_max == 0.0 or last_max < float(np.min(ratio[:third]))):
            decaying = False

    tails_arr = np.array(tails)
    runner_up = float(np.max(tails_arr)) if tails_arr.size else 0.0

    if runner_up >= 1.0 - TIE_TOLERANCE:
        partner = [n for n, r in trace.items() if r[-1] >= 1.0 - TIE_TOLERANCE]
        verdict = DominanceVerdict(
            candidate_index=k, verdict=Verdict.no_unique_dominant, grid=grid,
            ratio_trace=trace, threshold=threshold,
            notes=f"|C_n| of n={partner} keeps pace with n={k}",
        )
    elif runner_up < threshold and decaying:
        verdict = DominanceVerdict(
            dominant_index=k, candidate_index=k, verdict=Verdict.dominant, grid=grid,
            ratio_trace=trace, threshold=threshold,
        )
    else:
        verdict = DominanceVerdict(
            candidate_index=k, verdict=Verdict.inconclusive, grid=grid,
            ratio_trace=trace, threshold=threshold,
            notes=f"largest tail ratio {runner_up:.3g}; traces decaying: {decaying}",
        )
    logger.debug("dominance %s: %s (k=%d)", family.name, verdict.verdict.value, k)
    return verdict


# ============================
# Admissibility
# ============================

def _ordering_chains(mags: np.ndarray, grid: List[float]) -> OrderingResult:
    """Greedy increasing chains along which every |C_n| decreases."""

    def chain(strict: bool) -> List[float]:
        picked = [0]
        for i in range(1, len(grid)):
            prev, cur = mags[picked[-1]], mags[i]
            if strict:
                ok = np.all(np.where(prev > 0, cur < prev, cur == 0))
            else:
                ok = np.all(cur <= prev)
            if ok:
                picked.append(i)
        return [grid[i] for i in picked]

    strict_chain = chain(True)
    nonstrict_chain = chain(False)

    def reaches_end(c: List[float]) -> bool:
        return len(c) >= 2 and c[-1] == grid[-1]

    return OrderingResult(
        strict=reaches_end(strict_chain),
        nonstrict=reaches_end(nonstrict_chain),
        strict_chain=strict_chain,
        nonstrict_chain=nonstrict_chain,
    )


def check_admissibility(
    family: CoefficientFamily,
    alpha_grid: Sequence[float],
    kappa: float,
    cutoff: int,
    eps: float,
    rel_tol: Optional[float] = None,
) -> AdmissibilityReport:
    """
    (i) min σ_φ² >= κ over the grid, (ii) max tail Σ_{|n|>N} n²|C_n|² < eps,
    (iii) an increasing chain of grid points along which every |C_n|,
    |n| <= N, decreases. Both readings of (iii) are reported; the nonstrict
    one decides.
    """
    grid = _check_grid(alpha_grid, min_points=2)
    if not kappa > 0 or not eps > 0:
        raise InvalidParameter("kappa and eps must be positive")
    if cutoff < 1:
        raise InvalidParameter(f"N must be >= 1, got {cutoff}")

    var_phi = [_var_phi(family, a, rel_tol) for a in grid]
    tails = tail_second_moment(family, grid, cutoff)

    n = np.arange(-cutoff, cutoff + 1, dtype=np.int64)
    mags = np.array([np.abs(family.coefficients(n, a)) for a in grid])
    ordering = _ordering_chains(mags, grid)

    inf_var = min(var_phi)
    max_tail = max(tails)
    cond_i = ConditionResult(
        passed=bool(inf_var >= kappa), value=float(inf_var),
        detail=f"min sigma_phi^2 = {inf_var:.6g} at alpha = {grid[var_phi.index(inf_var)]:g}",
    )
    cond_ii = ConditionResult(
        passed=bool(max_tail < eps), value=float(max_tail),
        detail=f"max tail at N={cutoff}: {max_tail:.6g}",
    )
    notes = []
    if ordering.nonstrict and not ordering.strict:
        notes.append("condition (iii) holds only with non-strict decrease")
    return AdmissibilityReport(
        grid=grid, kappa=kappa, scan_n=cutoff, eps=eps,
        cond_i=cond_i, cond_ii=cond_ii, cond_iii=ordering,
        var_phi=var_phi, tails=tails, notes="; ".join(notes),
    )


def lower_bound_check(
    family: CoefficientFamily,
    alpha_grid: Sequence[float],
    n_scan: int = 8,
    rel_tol: Optional[float] = None,
) -> LowerBoundReport:
    """
    κ/(1+K) with κ = min σ_φ² and K = max ½Σ_{|n|≠|k|} |C_n/C_k|², against the
    observed products on the grid.
    """
    grid = _check_grid(alpha_grid, min_points=1)
    order = _scan_order(max(n_scan, family.support or 0))
    k = int(order[int(np.argmax(np.abs(family.coefficients(order, grid[-1]))))])

    kappa = math.inf
    big_k = 0.0
    products = []
    for a in grid:
        row = sweep_row(family, a, rel_tol)
        products.append(row.var_phi * row.var_lz)
        kappa = min(kappa, row.var_phi)
        s = build_spectrum(family, a, rel_tol=rel_tol)
        ck = abs(s.coeffs[s.cutoff + k]) if abs(k) <= s.cutoff else 0.0
        if ck == 0.0:
            raise DegenerateState(f"C_{k} vanishes at alpha={a}")
        others = s.weights[np.abs(s.indices) != abs(k)]
        big_k = max(big_k, 0.5 * (math.fsum(others) + s.mass_tail) / (ck * ck))

    bound = kappa / (1.0 + big_k)
    min_product = min(products)
    return LowerBoundReport(
        grid=grid, k=k, kappa=kappa, big_k=big_k, bound=bound,
        min_product_sq=min_product, passed=bool(min_product >= bound - 1e-12),
    )


# ============================
# Searches
# ============================

def find_alpha_star(
    family: CoefficientFamily,
    epsilon: float,
    alpha_hint: float = 1.0,
    alpha_max: float = ALPHA_STAR_MAX,
    rel_tol: Optional[float] = None,
) -> AlphaStarResult:
    """
    Some α* with σ_φσ_Lz(α*) < epsilon: α doubles from alpha_hint until the
    product drops below epsilon, then the last doubling step is bisected.
    """
    if not epsilon > 0:
        raise InvalidParameter(f"epsilon must be positive, got {epsilon}")
    if not alpha_hint > 0:
        raise InvalidParameter(f"alpha_hint must be positive, got {alpha_hint}")

    evaluations = 0
    best_alpha: Optional[float] = None
    best = math.inf

    def value(a: float) -> float:
        nonlocal evaluations, best_alpha, best
        evaluations += 1
        try:
            p = product(family, a, rel_tol)
        except DivergentMoment:
            p = math.inf
        if p < best:
            best_alpha, best = a, p
        return p

    lo: Optional[float] = None
    alpha = alpha_hint
    hi: Optional[float] = None
    p_hi = math.inf
    while alpha <= alpha_max:
        try:
            p = value(alpha)
        except DegenerateState:
            logger.info("%s: state degenerate at alpha=%g, search stops", family.name, alpha)
            break
        logger.debug("alpha* search %s: alpha=%g product=%.6g", family.name, alpha, p)
        if p < epsilon:
            hi, p_hi = alpha, p
            break
        lo = alpha
        alpha *= 2.0

    if hi is None:
        raise NotAttainable(
            f"no alpha <= {alpha_max:g} gives a product below {epsilon:g} for '{family.name}'; "
            f"smallest seen {best:.6g}",
            best_alpha=best_alpha,
            best_product=best,
        )

    if lo is not None:
        while hi - lo > 1e-9 * hi:
            mid = 0.5 * (lo + hi)
            p_mid = value(mid)
            if p_mid < epsilon:
                hi, p_hi = mid, p_mid
            else:
                lo = mid

    return AlphaStarResult(alpha=hi, product=p_hi, evaluations=evaluations)


def find_bound_crossing(
    family: CoefficientFamily,
    target: float,
    alpha_range: Tuple[float, float] = CROSSING_RANGE,
    points: int = CROSSING_POINTS,
    rel_tol: Optional[float] = None,
) -> CrossingResult:
    """
    α where σ_φσ_Lz crosses target: log-spaced scan for the first sign change
    between two finite points, then bisection to |Δα| < 1e-6.
    """
    if not math.isfinite(target):
        raise InvalidParameter(f"target must be finite, got {target}")
    lo, hi = alpha_range

    def g(a: float) -> float:
        try:
            return product(family, a, rel_tol) - target
        except DivergentMoment:
            return DIVERGENT_PRODUCT

    scan: List[Tuple[float, float]] = []
    for a in np.geomspace(lo, hi, points):
        a = float(a)
        try:
            scan.append((a, g(a)))
        except (InvalidParameter, DegenerateState, NonConvergent) as e:
            logger.debug("crossing scan skips alpha=%g: %s", a, e)

    for (a0, g0), (a1, g1) in zip(scan, scan[1:]):
        if DIVERGENT_PRODUCT in (g0, g1):
            continue
        if g0 == 0.0:
            return CrossingResult(alpha=a0, product=g0 + target, target=target, bracket=[a0, a0])
        if g0 * g1 < 0.0:
            root = optimize.bisect(g, a0, a1, xtol=CROSSING_XTOL)
            logger.debug("crossing %s target=%g in [%g, %g]: %.9g", family.name, target, a0, a1, root)
            return CrossingResult(
                alpha=root, product=product(family, root, rel_tol), target=target, bracket=[a0, a1]
            )

    raise NoBracket(
        f"product of '{family.name}' does not cross {target:g} on [{lo:g}, {hi:g}]",
        lo=lo, hi=hi, target=target,
    )


# ============================
# Asymptotics (exponential family)
# ============================

SMALL_ALPHAS = (1e-3, 2e-3, 4e-3)
LARGE_ALPHAS = (6.0, 8.0, 10.0)


def _law(
    name: str,
    alphas: Sequence[float],
    values: Sequence[float],
    limit: float,
    order: Callable[[float], float],
    bound: float,
) -> AsymptoticLaw:
    dev = np.asarray(values) - limit
    scale = np.array([order(a) for a in alphas])
    scaled = dev / scale
    fitted = float(np.dot(dev, scale) / np.dot(scale, scale))
    return AsymptoticLaw(
        name=name,
        alphas=list(alphas),
        values=[float(v) for v in values],
        limit=limit,
        deviations=dev.tolist(),
        scaled=scaled.tolist(),
        fitted_coefficient=fitted,
        bound=bound,
        passed=bool(np.all(np.abs(scaled) <= bound)),
    )


def asymptotic_check(family: CoefficientFamily, regime: str) -> AsymptoticReport:
    """
    small_alpha: σ_φ²/α² → 1, 2α²σ_Lz² → 1 and σ_φ²σ_Lz² → 1/2 with O(α)
    corrections. large_alpha: e^{2α}σ_Lz²/2 → 1 with O(e^{-2α}) and
    σ_φ² → π²/3 with O(e^{-α}) corrections.
    """
    if not _is_builtin(family, "exp"):
        raise InvalidParameter(f"asymptotic laws are known for the 'exp' family only, got '{family.name}'")

    if regime == "small_alpha":
        alphas = list(SMALL_ALPHAS)
        evs = [exp_closed(a) for a in alphas]
        laws = [
            _law("var_phi/alpha^2", alphas, [e.var_phi / a ** 2 for e, a in zip(evs, alphas)],
                 1.0, lambda a: a, 2.0),
            _law("2 alpha^2 var_lz", alphas, [2.0 * a ** 2 * e.var_lz for e, a in zip(evs, alphas)],
                 1.0, lambda a: a, 2.0),
            _law("var_phi var_lz", alphas, [e.product_sq for e in evs], 0.5, lambda a: a, 2.0),
        ]
    elif regime == "large_alpha":
        alphas = list(LARGE_ALPHAS)
        evs = [exp_closed(a) for a in alphas]
        laws = [
            _law("exp(2 alpha) var_lz/2", alphas,
                 [0.5 * math.exp(2.0 * a) * e.var_lz for e, a in zip(evs, alphas)],
                 1.0, lambda a: math.exp(-2.0 * a), 4.0),
            _law("var_phi", alphas, [e.var_phi for e in evs],
                 PI_SQ_3, lambda a: math.exp(-a), 10.0),
        ]
    else:
        raise InvalidParameter(f"regime must be 'small_alpha' or 'large_alpha', got {regime!r}")
    return AsymptoticReport(regime=regime, laws=laws)
