"""Two-asset market model and the martingale drift correction.

The log prices follow a bivariate normal mean-variance mixture

    X_i = mu_i + beta_i * Y + sqrt(Y) * (A row_i) . (N1, N2),

or, in the elliptical variant,

    X_i = mu_i + sqrt(R) * (A row_i) . (U1, U2)

with U uniform on the unit circle.  ``build_effective`` assembles the
effective log-price levels mu_i = delta_i + r + omega_i + ln S_i(0), where
omega_i is the drift correction that makes discounted prices martingales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import MgfDomainError
from .laws import MixingLaw, circle_mgf

__all__ = [
    "ModelSpec",
    "EffectiveModel",
    "SpreadContract",
    "martingale_drift",
    "build_effective",
]


@dataclass(frozen=True)
class ModelSpec:
    """Market inputs: initial prices, rate, skew/location loadings, the
    mixing matrix A (square root of the Gaussian covariance), and the law
    of the mixer.

    ``elliptical=True`` selects circle-uniform dynamics; there beta and
    delta must be zero (the elliptical model has no mixer-proportional
    drift term) and ``mu1_raw``/``mu2_raw`` optionally bypass the
    martingale normalization with user-chosen log-return locations
    (exclusive of ln S_i(0)).
    """

    s1_0: float
    s2_0: float
    law: MixingLaw
    r: float = 0.0
    delta1: float = 0.0
    delta2: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0
    a11: float = 0.0
    a12: float = 0.0
    a21: float = 0.0
    a22: float = 0.0
    elliptical: bool = False
    mu1_raw: float | None = None
    mu2_raw: float | None = None

    def __post_init__(self):
        if not self.s1_0 > 0.0:
            raise ValueError(f"s1_0 must be > 0, got {self.s1_0}")
        if not self.s2_0 > 0.0:
            raise ValueError(f"s2_0 must be > 0, got {self.s2_0}")
        if self.sigma1_sq <= 0.0:
            raise ValueError("row 1 of the mixing matrix must be nonzero")
        if self.sigma2_sq <= 0.0:
            raise ValueError("row 2 of the mixing matrix must be nonzero")
        if self.elliptical:
            if any(v != 0.0 for v in (self.beta1, self.beta2, self.delta1, self.delta2)):
                raise ValueError("elliptical mode requires beta and delta to be zero")
        elif self.mu1_raw is not None or self.mu2_raw is not None:
            raise ValueError("raw location overrides are only available in elliptical mode")

    @property
    def sigma1_sq(self) -> float:
        return self.a11 * self.a11 + self.a12 * self.a12

    @property
    def sigma2_sq(self) -> float:
        return self.a21 * self.a21 + self.a22 * self.a22


@dataclass(frozen=True)
class EffectiveModel:
    """Model after the martingale normalization.

    ``mu1``/``mu2`` absorb ln S_i(0), the rate, and the drift correction;
    every downstream moment formula consumes these directly.
    """

    mu1: float
    mu2: float
    beta1: float
    beta2: float
    a11: float
    a12: float
    a21: float
    a22: float
    law: MixingLaw
    elliptical: bool = False
    r: float = 0.0

    @property
    def sigma1_sq(self) -> float:
        return self.a11 * self.a11 + self.a12 * self.a12

    @property
    def sigma2_sq(self) -> float:
        return self.a21 * self.a21 + self.a22 * self.a22

    def row_combination(self, w1: float, w2: float) -> float:
        """Squared Euclidean norm of w1 * (row 1 of A) + w2 * (row 2 of A)."""
        e1 = w1 * self.a11 + w2 * self.a21
        e2 = w1 * self.a12 + w2 * self.a22
        return e1 * e1 + e2 * e2


@dataclass(frozen=True)
class SpreadContract:
    """European spread call terms: payoff (S1(T) - S2(T) - K)^+.

    ``rate`` defaults to the model rate; supplying a different value is
    rejected to keep drift and discounting under one measure.  Maturities
    other than 1 are supported only when the supplied mixing law is already
    the law of the horizon-T mixer; no time scaling is derived internally.
    """

    strike: float
    maturity: float = 1.0
    rate: float | None = None

    def __post_init__(self):
        if self.strike < 0.0:
            raise ValueError(f"strike must be >= 0, got {self.strike}")
        if not self.maturity > 0.0:
            raise ValueError(f"maturity must be > 0, got {self.maturity}")


def martingale_drift(law: MixingLaw, delta: float, beta: float, sigma_sq: float) -> float:
    """Drift correction omega = -delta - ln E[exp((beta + sigma^2/2) Y)].

    Always uses the exact MGF so simulation and semi-closed formulas share
    one discounted-martingale normalization.
    """
    arg = beta + 0.5 * sigma_sq
    bound = law.mgf_domain_bound
    if arg >= bound:
        raise MgfDomainError([("beta + sigma^2/2", arg)], bound)
    return -delta - math.log(law.mgf(arg))


def _elliptical_drift(law: MixingLaw, sigma_sq: float) -> float:
    """omega = -ln E[exp(sqrt(sigma^2) sqrt(R) U1)] via the circle series."""
    return -math.log(circle_mgf(law, sigma_sq))


def build_effective(spec: ModelSpec) -> EffectiveModel:
    """Assemble mu_i = delta_i + r + omega_i + ln S_i(0).

    In elliptical mode the circle-series expectation replaces the MGF; raw
    location overrides, when given, are used as the log-return locations in
    place of r + omega_i.
    """
    if spec.elliptical:
        if spec.mu1_raw is not None:
            mu1 = spec.mu1_raw + math.log(spec.s1_0)
        else:
            mu1 = spec.r + _elliptical_drift(spec.law, spec.sigma1_sq) + math.log(spec.s1_0)
        if spec.mu2_raw is not None:
            mu2 = spec.mu2_raw + math.log(spec.s2_0)
        else:
            mu2 = spec.r + _elliptical_drift(spec.law, spec.sigma2_sq) + math.log(spec.s2_0)
    else:
        omega1 = martingale_drift(spec.law, spec.delta1, spec.beta1, spec.sigma1_sq)
        omega2 = martingale_drift(spec.law, spec.delta2, spec.beta2, spec.sigma2_sq)
        mu1 = spec.delta1 + spec.r + omega1 + math.log(spec.s1_0)
        mu2 = spec.delta2 + spec.r + omega2 + math.log(spec.s2_0)
    return EffectiveModel(
        mu1=mu1,
        mu2=mu2,
        beta1=spec.beta1,
        beta2=spec.beta2,
        a11=spec.a11,
        a12=spec.a12,
        a21=spec.a21,
        a22=spec.a22,
        law=spec.law,
        elliptical=spec.elliptical,
        r=spec.r,
    )


def with_horizon(spec: ModelSpec, maturity: float) -> ModelSpec:
    """Fold a maturity into the spec by scaling the rate (the law is taken
    as the horizon-T mixer; see SpreadContract)."""
    if maturity == 1.0:
        return spec
    return replace(spec, r=spec.r * maturity)
