# backend/app/core/spectrum.py
"""
Truncated, normalised coefficient windows and the state they describe.

A spectrum stores C_n for |n| <= N together with the normalisation |A|².
The cutoff N is found by doubling the window and then bisecting for the
smallest N whose tail estimate meets the requested relative tolerance.
"""
import logging
import math
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import fft as sp_fft

from app.config import get_settings
from app.core.special_fn import hurwitz_zeta
from app.errors import DegenerateState, DivergentMoment, InvalidParameter, NonConvergent
from app.models import CoefficientFamily, StateSample, TailKind, TruncatedSpectrum

logger = logging.getLogger(__name__)

MIN_CUTOFF = 8
TAIL_WINDOW = 8
# local decay exponents this close to 1 are treated as divergent
EXPONENT_MARGIN = 1e-3
# algebraic extrapolations are trusted to this relative accuracy at best
EXTRAPOLATION_FLOOR = 1e-8
# a geometric run keeps its gaps 1 - r_j constant or growing; power laws
# shrink them by about 1/j per step
GEOMETRIC_SLACK = 1e-9
TAIL_RESIDUAL_TOL = 1e-14

# shells are summed directly below this many nonzero coefficients
DIRECT_SHELL_LIMIT = 128
# complex elements per block when evaluating the series on many angles
EVAL_BLOCK = 1 << 21


class TailEstimate(NamedTuple):
    kind: TailKind
    # geometric: majorant of the remainder; algebraic: extrapolated remainder
    value: float
    uncertainty: float = 0.0
    exponent: Optional[float] = None


# ============================
# Tail estimation
# ============================

def _algebraic_tail(t: np.ndarray, j: np.ndarray, exponent: float) -> float:
    """a·ζ(p, M+1) with a fixed by the last term t_M = a·M^(-p)."""
    m = float(j[-1])
    z = hurwitz_zeta(exponent, m + 1.0).value
    if z <= 0.0:
        return 0.0
    return math.exp(math.log(t[-1]) + exponent * math.log(m) + math.log(z))


def estimate_tail(t: np.ndarray, j: np.ndarray) -> TailEstimate:
    """
    Classify the decay of the last few terms t_j of a positive series and
    estimate Σ_{i > j[-1]} t_i.

    - zero: the window ends in exact zeros after a non-increasing run.
    - geometric: ratios below 1 with gaps 1 - r non-decreasing; majorant t·r/(1-r).
    - algebraic: local exponent p > 1; Hurwitz-zeta extrapolation, with the
      spread between the fits on the two halves of the window as uncertainty.
    - divergent: anything else (p <= 1 or mixed zeros).
    """
    t = np.asarray(t, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    nonincreasing = bool(np.all(t[1:] <= t[:-1]))

    if t[-1] == 0.0:
        if nonincreasing:
            return TailEstimate(TailKind.zero, 0.0)
        return TailEstimate(TailKind.divergent, math.inf)
    if np.any(t <= 0.0) or t.size < 3:
        return TailEstimate(TailKind.divergent, math.inf)

    ratios = t[1:] / t[:-1]
    gaps = 1.0 - ratios
    if np.all(gaps > 0.0) and np.all(gaps[1:] >= gaps[:-1] * (1.0 - GEOMETRIC_SLACK)):
        r = float(ratios[-1])
        return TailEstimate(TailKind.geometric, float(t[-1]) * r / (1.0 - r))

    half = t.size // 2
    logs_t = np.log(t)
    logs_j = np.log(j)
    p_early = -(logs_t[half - 1] - logs_t[0]) / (logs_j[half - 1] - logs_j[0])
    p_late = -(logs_t[-1] - logs_t[half]) / (logs_j[-1] - logs_j[half])
    if p_late <= 1.0 + EXPONENT_MARGIN or p_early <= 1.0 + EXPONENT_MARGIN:
        return TailEstimate(TailKind.divergent, math.inf, exponent=float(p_late))

    late = _algebraic_tail(t, j, float(p_late))
    early = _algebraic_tail(t, j, float(p_early))
    return TailEstimate(TailKind.algebraic, late, abs(late - early), float(p_late))


# ============================
# Cutoff search
# ============================

class _Decision(NamedTuple):
    tail_kind: TailKind
    tail_bound: float
    lz_tail: float
    mass_tail: float = 0.0


def _fold(c: np.ndarray, m: int) -> np.ndarray:
    """Per-|n| weights |C_n|² + |C_-n|², j = 0..m, from a window centred on n = 0."""
    w = np.abs(c) ** 2
    folded = np.empty(m + 1)
    folded[0] = w[m]
    folded[1:] = w[m + 1:] + w[m - 1::-1]
    return folded


def _decide(folded: np.ndarray, m: int, rel_tol: float, at_cap: bool = False) -> Optional[_Decision]:
    """
    Accept cutoff m or return None. `folded` may be longer than m + 1.

    With `at_cap` set (m is n_max) an algebraic normalisation tail that is
    still above rel_tol is accepted as long as its extrapolation is reliable.
    """
    lo = max(1, m - TAIL_WINDOW + 1)
    j = np.arange(lo, m + 1, dtype=np.float64)
    weights = folded[lo:m + 1]
    second = j * j * weights

    j_all = np.arange(m + 1, dtype=np.float64)
    retained_second = math.fsum(j_all * j_all * folded[:m + 1])
    tail2 = estimate_tail(second, j)
    if tail2.kind in (TailKind.zero, TailKind.geometric):
        if tail2.value <= rel_tol * retained_second:
            return _Decision(tail2.kind, tail2.value, 0.0)
        return None

    # second moment decays algebraically (or not at all): choose the cutoff by
    # the normalisation sum, whose extrapolated remainder joins the mass, and
    # carry the second-moment remainder separately
    tail0 = estimate_tail(weights, j)
    if tail0.kind != TailKind.algebraic:
        return None
    total = math.fsum(folded[:m + 1]) + tail0.value
    floor = max(rel_tol, EXTRAPOLATION_FLOOR)
    if tail0.uncertainty > floor * total:
        return None
    if tail0.value > rel_tol * total and not at_cap:
        return None
    if tail2.kind == TailKind.divergent:
        return _Decision(TailKind.divergent, tail0.value, math.inf, tail0.value)
    if tail2.uncertainty > floor * (retained_second + tail2.value):
        return None
    return _Decision(TailKind.algebraic, tail0.value, tail2.value, tail0.value)


def _window(family: CoefficientFamily, alpha: float, m: int) -> np.ndarray:
    c = family.coefficients(np.arange(-m, m + 1, dtype=np.int64), alpha)
    if not np.all(np.isfinite(c)):
        raise NonConvergent(f"family '{family.name}' produced non-finite coefficients at alpha={alpha}")
    return c


def _validate(alpha: float, rel_tol: float, n_max: int) -> None:
    if not (math.isfinite(alpha) and alpha > 0):
        raise InvalidParameter(f"alpha must be a positive number, got {alpha}")
    if not 0.0 < rel_tol < 1.0:
        raise InvalidParameter(f"rel_tol must lie in (0, 1), got {rel_tol}")
    if n_max < 1:
        raise InvalidParameter(f"n_max must be >= 1, got {n_max}")


def build_spectrum(
    family: CoefficientFamily,
    alpha: float,
    rel_tol: Optional[float] = None,
    n_max: Optional[int] = None,
) -> TruncatedSpectrum:
    """
    Normalised coefficient window for one α.

    Families with finite support are taken whole. Otherwise the window is
    doubled from N = 8 until the tail test passes, then bisected down to the
    smallest passing N.
    """
    settings = get_settings()
    rel_tol = settings.rel_tol if rel_tol is None else rel_tol
    n_max = settings.n_max if n_max is None else n_max
    _validate(alpha, rel_tol, n_max)

    if family.support is not None:
        cutoff = family.support
        coeffs = _window(family, alpha, cutoff)
        decision = _Decision(TailKind.exact, 0.0, 0.0)
    else:
        cutoff, coeffs, decision = _search_cutoff(family, alpha, rel_tol, n_max)

    weights = np.abs(coeffs) ** 2
    retained = math.fsum(weights)
    if not retained > 0.0:
        raise DegenerateState(
            f"all coefficients of '{family.name}' vanish (or underflow) at alpha={alpha}"
        )
    mass = retained + decision.mass_tail
    if not math.isfinite(mass):
        raise NonConvergent(f"normalisation sum overflows for '{family.name}' at alpha={alpha}")
    if decision.mass_tail > rel_tol * mass:
        logger.warning(
            "%s alpha=%g: window capped at n_max=%d; extrapolated normalisation tail %.3g "
            "(relative %.2g) folded into the mass",
            family.name, alpha, cutoff, decision.mass_tail, decision.mass_tail / mass,
        )

    return TruncatedSpectrum(
        family_name=family.name,
        alpha=alpha,
        cutoff=cutoff,
        coeffs=coeffs,
        norm_sq=1.0 / (2.0 * math.pi * mass),
        mass=mass,
        mass_tail=decision.mass_tail,
        tail_bound=decision.tail_bound,
        lz_tail=decision.lz_tail,
        tail_kind=decision.tail_kind,
        is_real=family.is_real,
        is_symmetric=family.is_symmetric,
    )


def _search_cutoff(family: CoefficientFamily, alpha: float, rel_tol: float, n_max: int):
    m = min(MIN_CUTOFF, n_max)
    previous = None
    while True:
        coeffs = _window(family, alpha, m)
        folded = _fold(coeffs, m)
        decision = _decide(folded, m, rel_tol, at_cap=m >= n_max)
        if decision is not None:
            break
        if m >= n_max:
            raise NonConvergent(
                f"tail of '{family.name}' at alpha={alpha} not below rel_tol={rel_tol:g} "
                f"within n_max={n_max}"
            )
        previous = m
        m = min(2 * m, n_max)

    hi = m
    if previous is not None:
        lo = previous
        while hi - lo > 1:
            mid = (lo + hi) // 2
            found = _decide(folded, mid, rel_tol)
            if found is None:
                lo = mid
            else:
                hi, decision = mid, found

    logger.debug(
        "cutoff %s alpha=%g: N=%d (%s tail, bound %.3g)",
        family.name, alpha, hi, decision.tail_kind.value, decision.tail_bound,
    )
    if decision.tail_kind == TailKind.algebraic:
        logger.info("%s alpha=%g: algebraic second-moment tail extrapolated (%.6g)",
                    family.name, alpha, decision.lz_tail)
    elif decision.tail_kind == TailKind.divergent:
        logger.info("%s alpha=%g: second moment diverges; cutoff set by normalisation",
                    family.name, alpha)
    return hi, coeffs[m - hi: m + hi + 1].copy(), decision


def window_only(s: TruncatedSpectrum) -> TruncatedSpectrum:
    """
    The stored window renormalised on its own, with the extrapolated tails
    dropped. A divergent second moment stays divergent.
    """
    if s.mass_tail == 0.0 and (s.lz_tail == 0.0 or s.lz_divergent):
        return s
    retained = math.fsum(s.weights)
    return s.model_copy(update={
        "mass": retained,
        "mass_tail": 0.0,
        "norm_sq": 1.0 / (2.0 * math.pi * retained),
        "lz_tail": math.inf if s.lz_divergent else 0.0,
    })


# ============================
# State evaluation
# ============================

def _support(s: TruncatedSpectrum):
    """Indices and coefficients of the nonzero part of the window."""
    nz = np.flatnonzero(s.coeffs)
    if nz.size == 0:
        return s.indices[:0], s.coeffs[:0]
    first, last = nz[0], nz[-1] + 1
    return s.indices[first:last], s.coeffs[first:last]


def _series(s: TruncatedSpectrum, phis: np.ndarray, derivative: bool) -> np.ndarray:
    phis = np.atleast_1d(np.asarray(phis, dtype=np.float64))
    n, c = _support(s)
    if derivative:
        c = 1j * n * c
    amp = math.sqrt(s.norm_sq)
    out = np.empty(phis.shape, dtype=np.complex128)
    rows = max(1, EVAL_BLOCK // max(1, n.size))
    for start in range(0, phis.size, rows):
        block = phis[start:start + rows]
        out[start:start + rows] = np.exp(1j * np.outer(block, n)) @ c
    return amp * out


def state_values(s: TruncatedSpectrum, phis: np.ndarray) -> np.ndarray:
    """f(φ) = A Σ C_n e^{inφ} on an array of angles."""
    return _series(s, phis, derivative=False)


def state_derivative_values(s: TruncatedSpectrum, phis: np.ndarray) -> np.ndarray:
    """f'(φ) = A Σ i n C_n e^{inφ}, the term-wise differentiated series."""
    return _series(s, phis, derivative=True)


def evaluate_state(s: TruncatedSpectrum, phi: float) -> StateSample:
    if not -math.pi <= phi <= math.pi:
        raise InvalidParameter(f"phi must lie in [-pi, pi], got {phi}")
    value = complex(state_values(s, np.array([phi]))[0])
    return StateSample(phi=phi, value=value)


def boundary_sum(s: TruncatedSpectrum) -> complex:
    """Σ (-1)^n C_n, i.e. f(π)/A."""
    signs = np.where(s.indices % 2 == 0, 1.0, -1.0)
    terms = signs * s.coeffs
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def boundary_density(s: TruncatedSpectrum) -> float:
    """|f(π)|²."""
    return s.norm_sq * abs(boundary_sum(s)) ** 2


# ============================
# Coefficient couplings
# ============================

def shell_sums(s: TruncatedSpectrum) -> np.ndarray:
    """
    S_k = Σ_m C_m^* C_{m+k} for k = 0..2N (S_{-k} = conj S_k).

    Only the nonzero part of the window enters; it is summed directly when
    short and by zero-padded FFT autocorrelation otherwise.
    """
    out = np.zeros(2 * s.cutoff + 1, dtype=np.complex128)
    _, c = _support(s)
    length = c.size
    if length == 0:
        return out
    if length <= DIRECT_SHELL_LIMIT:
        for k in range(length):
            out[k] = np.vdot(c[:length - k], c[k:])
        return out
    size = sp_fft.next_fast_len(2 * length - 1)
    spectrum = sp_fft.fft(c, size)
    auto = sp_fft.ifft(np.conj(spectrum) * spectrum)
    out[:length] = auto[:length]
    if s.is_real:
        out.imag = 0.0
    return out


# ============================
# Admissibility helper
# ============================

def _tail_second_moment_one(family: CoefficientFamily, alpha: float, cutoff: int, n_cap: int) -> float:
    if family.support is not None:
        if family.support <= cutoff:
            return 0.0
        c = _window(family, alpha, family.support)
        folded = _fold(c, family.support)
        j = np.arange(cutoff + 1, family.support + 1, dtype=np.float64)
        return math.fsum(j * j * folded[cutoff + 1:])

    reach = max(2 * cutoff, cutoff + TAIL_WINDOW)
    while True:
        c = _window(family, alpha, reach)
        folded = _fold(c, reach)
        j = np.arange(cutoff + 1, reach + 1, dtype=np.float64)
        terms = j * j * folded[cutoff + 1:]
        retained = math.fsum(terms)
        est = estimate_tail(terms[-TAIL_WINDOW:], j[-TAIL_WINDOW:])

        if est.kind == TailKind.zero:
            return retained
        if est.kind == TailKind.geometric and est.value <= TAIL_RESIDUAL_TOL * retained:
            return retained
        if est.kind == TailKind.algebraic and est.uncertainty <= EXTRAPOLATION_FLOOR * (retained + est.value):
            return retained + est.value
        if reach >= n_cap:
            if est.kind == TailKind.divergent and est.exponent is not None:
                raise DivergentMoment(
                    f"Σ n²|C_n|² diverges for '{family.name}' at alpha={alpha} "
                    f"(local decay exponent {est.exponent:.3f})"
                )
            raise NonConvergent(
                f"tail second moment of '{family.name}' at alpha={alpha} unresolved by n={n_cap}"
            )
        reach = min(2 * reach, n_cap)


def tail_second_moment(
    family: CoefficientFamily,
    alpha_grid: Sequence[float],
    cutoff: int,
    n_cap: Optional[int] = None,
) -> List[float]:
    """T_N(α) = Σ_{|n|>N} n²|C_n(α)|² for every α on the grid."""
    if len(alpha_grid) == 0:
        raise InvalidParameter("alpha grid must not be empty")
    if cutoff < 1:
        raise InvalidParameter(f"N must be >= 1, got {cutoff}")
    n_cap = get_settings().n_max if n_cap is None else n_cap
    out = []
    for alpha in alpha_grid:
        if not (math.isfinite(alpha) and alpha > 0):
            raise InvalidParameter(f"alpha must be a positive number, got {alpha}")
        out.append(_tail_second_moment_one(family, float(alpha), cutoff, n_cap))
    return out
