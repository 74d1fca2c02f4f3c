# backend/app/errors.py
from typing import Optional


class UncertaintyLabError(Exception):
    """Root of every domain error raised by the library."""


class InvalidParameter(UncertaintyLabError, ValueError):
    pass


class NonConvergent(UncertaintyLabError):
    pass


class DegenerateState(UncertaintyLabError):
    pass


class DivergentMoment(UncertaintyLabError):
    pass


class ToleranceNotMet(UncertaintyLabError):
    def __init__(self, message: str, estimate: float, error: float, evaluations: int):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.evaluations = evaluations


class NotAttainable(UncertaintyLabError):
    """
    The search budget ran out before the uncertainty product fell below epsilon.
    Carries the smallest product seen, which approximates the family's infimum.
    """

    def __init__(self, message: str, best_alpha: Optional[float], best_product: float):
        super().__init__(message)
        self.best_alpha = best_alpha
        self.best_product = best_product


class NoBracket(UncertaintyLabError):
    def __init__(self, message: str, lo: float, hi: float, target: float):
        super().__init__(message)
        self.lo = lo
        self.hi = hi
        self.target = target
