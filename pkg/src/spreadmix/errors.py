"""Exception types shared across the library."""

from __future__ import annotations


class SpreadMixError(Exception):
    """Base class for all library-specific errors."""


class MgfDomainError(SpreadMixError):
    """An MGF argument fell on or beyond the finiteness bound.

    Carries every offending argument so callers can see exactly which
    exponential moment blew up, not just the first one.
    """

    def __init__(self, offenders, bound):
        self.offenders = tuple(offenders)  # (label, argument) pairs
        self.bound = float(bound)
        listing = ", ".join(f"{label}={arg:.6g}" for label, arg in self.offenders)
        super().__init__(
            f"MGF argument(s) outside the finiteness bound D={self.bound:.6g}: {listing}"
        )


class NoSolutionError(SpreadMixError):
    """Moment matching failed: every start ended above the acceptance residual."""

    def __init__(self, best_residual, starts_tried, detail=""):
        self.best_residual = float(best_residual)
        self.starts_tried = int(starts_tried)
        msg = (
            f"no proxy parameters found (best residual {self.best_residual:.3e} "
            f"after {self.starts_tried} starts)"
        )
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class QuadratureError(SpreadMixError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, estimate=None, error_estimate=None):
        self.estimate = estimate
        self.error_estimate = error_estimate
        super().__init__(message)


class SeriesDivergenceError(SpreadMixError):
    """A power series failed to converge within the term cap."""


class ConfigError(SpreadMixError):
    """A CLI configuration document failed validation.

    ``field`` names the offending key so errors are actionable.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
