"""Semi-closed spread price evaluation.

Each proxy admits a two-branch price.  When the shift parameter sits at or
above the strike the payoff is linear and the price is a single MGF (or
series) evaluation; otherwise the price is a pair of expectations over the
mixing law of normal-CDF integrands, evaluated by adaptive quadrature with
a log-substituted tail, or -- in the elliptical case -- a double integral
over the mixer and the circle angle.

``price_spread_approx`` is the full pipeline: martingale normalization,
exact spread moments, moment matching, then the branch formula, with all
diagnostics attached to the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import MgfDomainError, QuadratureError
from .laws import InverseGaussian, MgfKind, MixingLaw, circle_mgf
from .market import ModelSpec, SpreadContract, build_effective, with_horizon
from .matching import MatchOptions, MatchReport, match_elliptical, match_mean_variance, match_variance
from .moments import (
    MomentMode,
    exact_moments_elliptical,
    exact_moments_mean_variance,
    exact_moments_variance,
)
from .proxy import EllipticalProxy, MeanVarianceProxy, VarianceProxy

__all__ = [
    "PriceBranch",
    "PriceReport",
    "mixture_expectation",
    "radial_density_h",
    "price_mean_variance",
    "price_variance",
    "price_elliptical",
    "price_spread_approx",
]

_EXP_CAP = 700.0  # keeps exp() finite; beyond this the density has underflowed

# fixed Gauss-Legendre rule for the smooth inner angle integral
_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


class PriceBranch(Enum):
    SHIFT_ABOVE_STRIKE = "shift_above_strike"  # linear payoff, single evaluation
    INTEGRAL = "integral"  # strike bites; quadrature branch


@dataclass(frozen=True)
class PriceReport:
    """Price plus provenance: branch taken, matching diagnostics, quadrature
    error, and convention notes (MGF kind, IG parameterization, flooring)."""

    price: float
    branch: PriceBranch
    quadrature_error_estimate: float = 0.0
    match: MatchReport | None = None
    mgf_kind: MgfKind | None = None
    notes: dict = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.notes is None:
            object.__setattr__(self, "notes", {})
        if self.price < 0.0:
            raise ValueError(f"price must be >= 0, got {self.price}")


def _law_notes(law: MixingLaw) -> dict:
    notes = {"law": law.describe()}
    if isinstance(law, InverseGaussian):
        notes["ig_parameterization"] = law.parameterization.value
    return notes


def _quad(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    with np.errstate(over="ignore", under="ignore"):
        out = integrate.quad(f, a, b, epsabs=1e-14, epsrel=tol, limit=300, full_output=1)
    value, err = out[0], out[1]
    if len(out) > 3 and err > 10.0 * tol * max(abs(value), 1.0):
        raise QuadratureError(
            f"quadrature failed on [{a:.3g}, {b:.3g}]: {out[3]}",
            estimate=value,
            error_estimate=err,
        )
    return value, err


def _mixture_expectation(g, law: MixingLaw, tol: float) -> tuple[float, float]:
    if law.atom is not None:
        return float(g(law.atom)), 0.0
    split = max(1.0, law.raw_moment(1))

    def head(y: float) -> float:
        return g(y) * law.density(y)

    def tail(u: float) -> float:
        if u >= _EXP_CAP:
            return 0.0  # every density here has underflowed by exp(700)
        y = math.exp(u)
        return g(y) * law.density(y) * y

    v1, e1 = _quad(head, 0.0, split, tol)
    v2, e2 = _quad(tail, math.log(split), math.inf, tol)
    return v1 + v2, e1 + e2


def mixture_expectation(g, law: MixingLaw, tol: float = 1e-9) -> float:
    """E[g(Y)] = integral of g against the mixing density.

    Adaptive quadrature with the tail integrated under y = exp(u); the
    relative tolerance applies to the combined result.  Point-mass laws
    return g at the atom directly.
    """
    value, _ = _mixture_expectation(g, law, tol)
    return value


def _integral_branch_price(
    *,
    a: float,
    growth: float,          # coefficient of Y inside the first expectation
    slope1: float,          # Y-coefficient in the first CDF numerator
    slope2: float,          # Y-coefficient in the second CDF numerator
    log_gap: float,         # ln(strike - shift)
    level: float,           # constant subtracted in both CDF numerators
    prefactor: float,       # e^{c-r} (mean-variance) or e^{b-r} (variance)
    shift_minus_strike: float,
    rate: float,
    law: MixingLaw,
    tol: float,
) -> tuple[float, float]:
    """Common c/d < K evaluation for the two mixture proxies.

    price = prefactor * E[exp(growth Y) Phi(-(log_gap - slope1 Y - level)/(a sqrt(Y)))]
          + (shift - strike) e^{-rate} E[Phi(-(log_gap - slope2 Y - level)/(a sqrt(Y)))]
    """
    if a <= 0.0:
        raise ValueError("integral branch requires a > 0")
    if growth >= law.mgf_domain_bound:
        raise QuadratureError(
            f"integrand grows like exp({growth:.6g} y), at or beyond the MGF bound "
            f"D={law.mgf_domain_bound:.6g}: the expectation diverges"
        )

    def angle(y: float, slope: float) -> float:
        return -(log_gap - slope * y - level) / (a * math.sqrt(y))

    def g_pay(y: float) -> float:
        if y <= 0.0:
            return 0.0
        return math.exp(min(growth * y, _EXP_CAP)) * special.ndtr(angle(y, slope1))

    def g_prob(y: float) -> float:
        if y <= 0.0:
            return 0.0
        return special.ndtr(angle(y, slope2))

    v_pay, e_pay = _mixture_expectation(g_pay, law, tol)
    v_prob, e_prob = _mixture_expectation(g_prob, law, tol)
    disc = math.exp(-rate)
    price = prefactor * v_pay + shift_minus_strike * disc * v_prob
    err = abs(prefactor) * e_pay + abs(shift_minus_strike) * disc * e_prob
    return price, err


def _finalize(price: float, err: float, branch: PriceBranch, law, kind, match, extra=None) -> PriceReport:
    notes = _law_notes(law)
    if kind is not None:
        notes["mgf_kind"] = kind.value
    if extra:
        notes.update(extra)
    floored = price < 0.0
    notes["floored"] = "yes" if floored else "no"
    if floored:
        notes["raw_price"] = f"{price:.6g}"
    return PriceReport(
        price=max(price, 0.0),
        branch=branch,
        quadrature_error_estimate=err,
        match=match,
        mgf_kind=kind,
        notes=notes,
    )


def _check_same_kind(match: MatchReport | None, kind: MgfKind) -> None:
    if match is not None and match.mgf_kind is not kind:
        raise ValueError(
            f"matching used the {match.mgf_kind.value} MGF but pricing was asked for "
            f"{kind.value}; the two must agree"
        )


def price_mean_variance(
    p: MeanVarianceProxy,
    law: MixingLaw,
    strike: float,
    rate: float = 0.0,
    mgf_kind: MgfKind = MgfKind.TRUNCATED,
    tol: float = 1e-9,
    match: MatchReport | None = None,
) -> PriceReport:
    """Discounted E[(W - strike)^+] for W = exp(a sqrt(Y) N + b Y + c) + d.

    For d >= strike the payoff is linear: exp(c - rate) phi(a^2/2 + b) +
    d - strike, evaluated with the requested MGF kind.  Otherwise two
    mixture expectations are integrated; tiny negative results from
    quadrature are floored at zero and recorded.
    """
    _check_same_kind(match, mgf_kind)
    s1 = 0.5 * p.a * p.a + p.b
    if p.d >= strike:
        if mgf_kind is MgfKind.EXACT and s1 >= law.mgf_domain_bound:
            raise MgfDomainError([("a^2/2 + b", s1)], law.mgf_domain_bound)
        price = math.exp(p.c - rate) * law.mgf_eval(s1, mgf_kind) + (p.d - strike) * math.exp(-rate)
        return _finalize(price, 0.0, PriceBranch.SHIFT_ABOVE_STRIKE, law, mgf_kind, match)
    price, err = _integral_branch_price(
        a=p.a,
        growth=s1,
        slope1=p.a * p.a + p.b,
        slope2=p.b,
        log_gap=math.log(strike - p.d),
        level=p.c,
        prefactor=math.exp(p.c - rate),
        shift_minus_strike=p.d - strike,
        rate=rate,
        law=law,
        tol=tol,
    )
    return _finalize(price, err, PriceBranch.INTEGRAL, law, mgf_kind, match)


def price_variance(
    p: VarianceProxy,
    law: MixingLaw,
    strike: float,
    rate: float = 0.0,
    mgf_kind: MgfKind = MgfKind.TRUNCATED,
    tol: float = 1e-9,
    match: MatchReport | None = None,
) -> PriceReport:
    """Discounted E[(W - strike)^+] for W = exp(a sqrt(Y) N + b) + c.

    The drift term b is a constant, so the second CDF numerator has no Y
    contribution at all: it is -(ln(strike - c) - b) / (a sqrt(Y)).
    """
    _check_same_kind(match, mgf_kind)
    s1 = 0.5 * p.a * p.a
    if p.c >= strike:
        if mgf_kind is MgfKind.EXACT and s1 >= law.mgf_domain_bound:
            raise MgfDomainError([("a^2/2", s1)], law.mgf_domain_bound)
        price = math.exp(p.b - rate) * law.mgf_eval(s1, mgf_kind) + (p.c - strike) * math.exp(-rate)
        return _finalize(price, 0.0, PriceBranch.SHIFT_ABOVE_STRIKE, law, mgf_kind, match)
    price, err = _integral_branch_price(
        a=p.a,
        growth=s1,
        slope1=p.a * p.a,
        slope2=0.0,
        log_gap=math.log(strike - p.c),
        level=p.b,
        prefactor=math.exp(p.b - rate),
        shift_minus_strike=p.c - strike,
        rate=rate,
        law=law,
        tol=tol,
    )
    return _finalize(price, err, PriceBranch.INTEGRAL, law, mgf_kind, match)


def radial_density_h(law: MixingLaw, z: float, tol: float = 1e-9) -> float:
    """Density of sqrt(R) U1 at z (U uniform on the unit circle, R ~ law).

    Conditioning on R = rho gives the scaled arcsine density
    1/(pi sqrt(rho - z^2)) on |z| < sqrt(rho); averaging over the law and
    substituting rho = z^2 + u^2 removes the inverse-square-root endpoint:

        h(z) = (2/pi) * integral_0^inf f_R(z^2 + u^2) du.

    Symmetric in z.  For a point mass at rho0 the closed form applies.
    """
    zsq = z * z
    if law.atom is not None:
        rho = law.atom
        if zsq >= rho:
            return 0.0
        return 1.0 / (math.pi * math.sqrt(rho - zsq))
    value, _ = _quad(lambda u: law.density(zsq + u * u), 0.0, math.inf, tol)
    return 2.0 * value / math.pi


def _angle_payoff_integral(a: float, sqrt_rho: float, theta_max: float) -> float:
    """(1/pi) * integral_0^theta_max exp(a sqrt_rho cos(theta)) dtheta."""
    if theta_max <= 0.0:
        return 0.0
    half = 0.5 * theta_max
    theta = half * (_GL_X + 1.0)
    vals = np.exp(np.minimum(a * sqrt_rho * np.cos(theta), _EXP_CAP))
    return float(half * np.dot(_GL_W, vals)) / math.pi


def price_elliptical(
    p: EllipticalProxy,
    law: MixingLaw,
    strike: float,
    rate: float = 0.0,
    series_tol: float = 1e-12,
    tol: float = 1e-9,
    match: MatchReport | None = None,
) -> PriceReport:
    """Discounted E[(W - strike)^+] for W = exp(a sqrt(R) U1 + b) + c.

    For c >= strike the payoff is linear and the circle-mixture series
    gives the price.  Otherwise, writing z0 = (ln(strike - c) - b)/a, the
    price is

        e^{-rate} [ integral_{z0}^inf e^{a z + b} h(z) dz
                    + (c - strike) * P(sqrt(R) U1 >= z0) ]

    with a single factor e^b in the payoff integrand (the exponential-part
    expectation of W given the event, consistent with the linear branch at
    c = strike).  Both integrals are evaluated in angle coordinates, where
    the arcsine endpoint singularity of h vanishes.
    """
    if p.c >= strike:
        price = math.exp(p.b - rate) * circle_mgf(law, p.a * p.a, tol=series_tol) + (
            p.c - strike
        ) * math.exp(-rate)
        return _finalize(price, 0.0, PriceBranch.SHIFT_ABOVE_STRIKE, law, None, match)
    if p.a <= 0.0:
        raise ValueError("integral branch requires a > 0")
    z0 = (math.log(strike - p.c) - p.b) / p.a

    def theta_max(rho: float) -> float:
        if rho <= 0.0:
            return 0.0
        ratio = z0 / math.sqrt(rho)
        if ratio >= 1.0:
            return 0.0
        if ratio <= -1.0:
            return math.pi
        return math.acos(ratio)

    def g_pay(rho: float) -> float:
        return _angle_payoff_integral(p.a, math.sqrt(rho), theta_max(rho))

    def g_prob(rho: float) -> float:
        return theta_max(rho) / math.pi

    v_pay, e_pay = _mixture_expectation(g_pay, law, tol)
    v_prob, e_prob = _mixture_expectation(g_prob, law, tol)
    disc = math.exp(-rate)
    price = math.exp(p.b - rate) * v_pay + (p.c - strike) * disc * v_prob
    err = math.exp(p.b - rate) * e_pay + abs(p.c - strike) * disc * e_prob
    return _finalize(price, err, PriceBranch.INTEGRAL, law, None, match)


def price_spread_approx(
    spec: ModelSpec,
    contract: SpreadContract,
    mgf_kind: MgfKind = MgfKind.TRUNCATED,
    tol: float = 1e-9,
    series_tol: float = 1e-12,
    match_options: MatchOptions | None = None,
) -> PriceReport:
    """Full pipeline: normalize drifts, compute exact spread moments, match
    the proxy, and evaluate the branch formula.

    The mode follows the model: elliptical if flagged, mean-variance if any
    skew loading is nonzero, variance otherwise.  Target moments always use
    the closed-form MGF (they are plain numbers with exact expressions);
    ``mgf_kind`` selects the evaluation inside the matching system and the
    linear pricing branch, where the parameters sit in the MGF argument and
    the fourth-order polynomial keeps the solve unconditionally finite.
    Matching and pricing always share one kind.
    """
    if contract.rate is not None and contract.rate != spec.r:
        raise ValueError(
            f"contract rate {contract.rate} differs from model rate {spec.r}; "
            "drift and discounting must share one rate"
        )
    rate = spec.r * contract.maturity
    model = build_effective(with_horizon(spec, contract.maturity))
    strike = contract.strike

    if spec.elliptical:
        target = exact_moments_elliptical(model, tol=series_tol)
        report = match_elliptical(target, spec.law, tol=series_tol, options=match_options)
        priced = price_elliptical(
            report.params, spec.law, strike, rate, series_tol=series_tol, tol=tol, match=report
        )
        extra = {"mode": MomentMode.ELLIPTICAL.value}
    elif spec.beta1 != 0.0 or spec.beta2 != 0.0:
        target = exact_moments_mean_variance(model, MgfKind.EXACT)
        report = match_mean_variance(target, spec.law, mgf_kind, options=match_options)
        priced = price_mean_variance(
            report.params, spec.law, strike, rate, mgf_kind, tol=tol, match=report
        )
        extra = {"mode": MomentMode.MEAN_VARIANCE.value}
    else:
        target = exact_moments_variance(model, MgfKind.EXACT)
        report = match_variance(target, spec.law, mgf_kind, options=match_options)
        priced = price_variance(
            report.params, spec.law, strike, rate, mgf_kind, tol=tol, match=report
        )
        extra = {"mode": MomentMode.VARIANCE.value}

    extra["moment_arguments"] = "; ".join(f"{lab}={val:.6g}" for lab, val in target.arguments)
    extra["target_moments"] = ", ".join(f"{v:.10g}" for v in target.values)
    notes = dict(priced.notes)
    notes.update(extra)
    return PriceReport(
        price=priced.price,
        branch=priced.branch,
        quadrature_error_estimate=priced.quadrature_error_estimate,
        match=report,
        mgf_kind=None if spec.elliptical else mgf_kind,
        notes=notes,
    )
