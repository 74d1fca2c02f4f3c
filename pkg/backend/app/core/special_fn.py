# backend/app/core/special_fn.py
"""
Special functions needed by the closed forms and the tail extrapolation.

- dilog: real dilogarithm Li₂(z) on [-1, 0].
- hurwitz_zeta / zeta: Euler–Maclaurin summation for real s > 1.
- ln1p: log(1 + x) without cancellation for tiny x.

All evaluators return an EvalResult whose est_error bounds the truncation
error of the series that produced it.
"""
import logging
import math

import numpy as np

from app.errors import InvalidParameter
from app.models import EvalResult

logger = logging.getLogger(__name__)

# Li₂ reflection is used above this |z|; keeps term counts below 60 on [-1, 0]
DILOG_REFLECTION = 0.5
DILOG_MAX_TERMS = 200

# Euler–Maclaurin: direct terms up to x >= max(20, 6s) (capped at 1000), then
# Bernoulli corrections B_2 .. B_8, plus B_10 for the remainder estimate
ZETA_DIRECT_TERMS = 20
ZETA_SWITCH_CAP = 1000.0
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0)
ZETA_CORRECTIONS = 4


def ln1p(x: float) -> float:
    if not x > -1.0:
        raise InvalidParameter(f"ln1p needs x > -1, got {x}")
    return float(np.log1p(x))


def _positive_series(w: float) -> EvalResult:
    """Σ w^k/k² for 0 <= w <= 1/2; terms shrink at least by the factor w."""
    terms = []
    power = 1.0
    for k in range(1, DILOG_MAX_TERMS + 1):
        power *= w
        term = power / (k * k)
        terms.append(term)
        # remaining tail <= next term / (1 - w)
        nxt = power * w / ((k + 1) ** 2)
        if nxt / (1.0 - w) <= 1e-17 * max(math.fsum(terms), 1e-300):
            return EvalResult(value=math.fsum(terms), est_error=nxt / (1.0 - w), terms_used=k)
    nxt = power * w / ((DILOG_MAX_TERMS + 1) ** 2)
    return EvalResult(value=math.fsum(terms), est_error=nxt / (1.0 - w), terms_used=DILOG_MAX_TERMS)


def _alternating_series(z: float) -> EvalResult:
    """Σ z^k/k² for -1/2 <= z < 0; alternating with decreasing terms."""
    terms = []
    power = 1.0
    for k in range(1, DILOG_MAX_TERMS + 1):
        power *= z
        terms.append(power / (k * k))
        nxt = abs(power * z) / ((k + 1) ** 2)
        if nxt <= 1e-17 * abs(math.fsum(terms)):
            return EvalResult(value=math.fsum(terms), est_error=nxt, terms_used=k)
    nxt = abs(power * z) / ((DILOG_MAX_TERMS + 1) ** 2)
    return EvalResult(value=math.fsum(terms), est_error=nxt, terms_used=DILOG_MAX_TERMS)


def dilog(z: float) -> EvalResult:
    """
    Real dilogarithm Li₂(z) = Σ_{k>0} z^k/k² for -1 <= z <= 0.

    For |z| > 1/2 the reflection Li₂(z) = -Li₂(z/(z-1)) - ln²(1-z)/2 maps the
    argument into (1/3, 1/2], where the positive series converges fast.
    """
    if not -1.0 <= z <= 0.0:
        raise InvalidParameter(f"dilog is implemented on [-1, 0], got {z}")
    if z == 0.0:
        return EvalResult(value=0.0, est_error=0.0, terms_used=0)
    if abs(z) <= DILOG_REFLECTION:
        return _alternating_series(z)

    w = z / (z - 1.0)
    inner = _positive_series(w)
    log_term = ln1p(-z)
    value = -inner.value - 0.5 * log_term * log_term
    return EvalResult(value=value, est_error=inner.est_error, terms_used=inner.terms_used)


def hurwitz_zeta(s: float, q: float = 1.0, direct_terms: int = ZETA_DIRECT_TERMS) -> EvalResult:
    """
    ζ(s, q) = Σ_{n>=0} (n + q)^{-s} for real s > 1, q > 0.

    Direct summation up to x = q + n0 (skipped when q is already past the
    switch point), then the Euler–Maclaurin tail with four Bernoulli
    corrections; the fifth correction term is returned as the error estimate.
    """
    if not s > 1.0:
        raise InvalidParameter(f"zeta needs s > 1 (the sum diverges otherwise), got {s}")
    if not q > 0.0:
        raise InvalidParameter(f"Hurwitz zeta needs q > 0, got {q}")

    switch = max(float(direct_terms), min(6.0 * s, ZETA_SWITCH_CAP))
    n0 = max(0, int(math.ceil(switch - q)))
    terms = [(n + q) ** (-s) for n in range(n0)]
    x = q + n0

    terms.append(x ** (1.0 - s) / (s - 1.0))
    terms.append(0.5 * x ** (-s))

    # rising factorial s(s+1)...(s+2j-2) and factorial (2j)!
    rising = s
    factorial = 2.0
    power = x ** (-s - 1.0)
    est_error = 0.0
    for j, b2j in enumerate(_BERNOULLI, start=1):
        term = b2j / factorial * rising * power
        if j <= ZETA_CORRECTIONS:
            terms.append(term)
        else:
            est_error = abs(term)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        factorial *= (2 * j + 1) * (2 * j + 2)
        power /= x * x

    value = math.fsum(terms)
    return EvalResult(value=value, est_error=est_error, terms_used=n0 + 2 + ZETA_CORRECTIONS)


def zeta(s: float) -> EvalResult:
    return hurwitz_zeta(s, 1.0)
