"""Moments of the discounted spread and of the matching proxy variables.

Exact side: moments of exp(X1) - exp(X2) expand binomially into mixed
exponential moments E[exp(i X1 + j X2)], each of which reduces to

    exp(i mu1 + j mu2) * phi_Y(i beta1 + j beta2 + |i A1 + j A2|^2 / 2)

in the mixture model (A1, A2 the rows of the mixing matrix), or to the
circle-mixture series with squared scale |i A1 + j A2|^2 in the elliptical
model.

Proxy side: the shifted exponential proxies have moments of the same shape
with arguments n^2 a^2/2 + n b (mean-variance), n^2 a^2/2 (variance), and
series arguments n^2 a^2 (elliptical).

Every MGF argument is retained with a label so a finiteness violation can
report exactly which mixed moment failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from math import comb

from .errors import MgfDomainError
from .laws import MgfKind, MixingLaw, circle_mgf
from .market import EffectiveModel
from .proxy import EllipticalProxy, MeanVarianceProxy, VarianceProxy

__all__ = [
    "MomentMode",
    "MomentSet",
    "exact_moments",
    "exact_moments_mean_variance",
    "exact_moments_variance",
    "exact_moments_elliptical",
    "proxy_moments_mean_variance",
    "proxy_moments_variance",
    "proxy_moments_elliptical",
]


class MomentMode(Enum):
    MEAN_VARIANCE = "mean_variance"  # four moments matched
    VARIANCE = "variance"  # three moments, zero skew loadings
    ELLIPTICAL = "elliptical"  # three moments, circle-uniform driver


@dataclass(frozen=True)
class MomentSet:
    """Ordered spread moments with provenance.

    ``values`` holds M1..M4 (mean-variance) or M1..M3 (variance,
    elliptical).  ``mgf_kind`` records which MGF evaluation produced them;
    ``arguments`` keeps the labeled MGF (or series) arguments for
    diagnostics.
    """

    values: tuple[float, ...]
    mode: MomentMode
    mgf_kind: MgfKind
    arguments: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        expected = 4 if self.mode is MomentMode.MEAN_VARIANCE else 3
        if len(values) != expected:
            raise ValueError(
                f"{self.mode.value} moment set needs {expected} values, got {len(values)}"
            )
        if self.mgf_kind is MgfKind.EXACT:
            m1, m2 = values[0], values[1]
            slack = 1e-12 * max(1.0, abs(m2), m1 * m1)
            if m2 < m1 * m1 - slack:
                raise ValueError(
                    f"inconsistent moments: M2 = {m2:.6g} < M1^2 = {m1 * m1:.6g} "
                    "(negative variance)"
                )

    def __iter__(self):
        return iter(self.values)


def _mixture_exponent_terms(model: EffectiveModel, order: int):
    """Labeled (coefficient, exp-of-mu factor, mgf argument) terms of
    E[(e^X1 - e^X2)^n] for n = order, in the mixture model."""
    terms = []
    for j in range(order + 1):
        i = order - j
        sign = -1.0 if j % 2 else 1.0
        coeff = sign * comb(order, j)
        arg = i * model.beta1 + j * model.beta2 + 0.5 * model.row_combination(i, j)
        terms.append((f"{i}*X1+{j}*X2", coeff, i * model.mu1 + j * model.mu2, arg))
    return terms


def _check_domain(labeled_args, bound: float):
    offenders = [(label, arg) for label, arg in labeled_args if arg >= bound]
    if offenders:
        raise MgfDomainError(offenders, bound)


def exact_moments_mean_variance(model: EffectiveModel, mgf_kind: MgfKind) -> MomentSet:
    """M1..M4 of exp(X1) - exp(X2) in the mean-variance mixture model.

    With the exact MGF, every mixed-moment argument must sit below the
    finiteness bound; all offenders are reported at once.
    """
    per_order = [_mixture_exponent_terms(model, n) for n in range(1, 5)]
    labeled = [(label, arg) for terms in per_order for (label, _, _, arg) in terms]
    if mgf_kind is MgfKind.EXACT:
        _check_domain(labeled, model.law.mgf_domain_bound)
    values = []
    for terms in per_order:
        total = 0.0
        for _, coeff, log_scale, arg in terms:
            total += coeff * math.exp(log_scale) * model.law.mgf_eval(arg, mgf_kind)
        values.append(total)
    return MomentSet(tuple(values), MomentMode.MEAN_VARIANCE, mgf_kind, tuple(labeled))


def exact_moments_variance(model: EffectiveModel, mgf_kind: MgfKind) -> MomentSet:
    """M1..M3 with the skew loadings forced to zero (variance mixture)."""
    zero_beta = (
        model
        if model.beta1 == 0.0 and model.beta2 == 0.0
        else EffectiveModel(
            mu1=model.mu1,
            mu2=model.mu2,
            beta1=0.0,
            beta2=0.0,
            a11=model.a11,
            a12=model.a12,
            a21=model.a21,
            a22=model.a22,
            law=model.law,
            elliptical=model.elliptical,
            r=model.r,
        )
    )
    full = exact_moments_mean_variance(zero_beta, mgf_kind)
    labeled = full.arguments[:9]  # orders 1..3 contribute 2+3+4 mixed moments
    return MomentSet(full.values[:3], MomentMode.VARIANCE, mgf_kind, labeled)


def exact_moments_elliptical(model: EffectiveModel, tol: float = 1e-12) -> MomentSet:
    """M1..M3 of the spread under circle-uniform dynamics.

    Each mixed moment is the circle-mixture series at squared scale
    |i A1 + j A2|^2; series are truncated at relative term size ``tol``.
    The effective locations mu_i already absorb ln S_i(0).
    """
    values = []
    labeled = []
    for n in range(1, 4):
        total = 0.0
        for j in range(n + 1):
            i = n - j
            sign = -1.0 if j % 2 else 1.0
            x = model.row_combination(i, j)
            labeled.append((f"{i}*X1+{j}*X2", x))
            total += sign * comb(n, j) * math.exp(i * model.mu1 + j * model.mu2) * circle_mgf(
                model.law, x, tol=tol
            )
        values.append(total)
    return MomentSet(tuple(values), MomentMode.ELLIPTICAL, MgfKind.EXACT, tuple(labeled))


def exact_moments(model: EffectiveModel, mgf_kind: MgfKind = MgfKind.TRUNCATED, tol: float = 1e-12) -> MomentSet:
    """Dispatch on the model: elliptical if flagged, mean-variance if any
    skew loading is nonzero, variance otherwise."""
    if model.elliptical:
        return exact_moments_elliptical(model, tol=tol)
    if model.beta1 != 0.0 or model.beta2 != 0.0:
        return exact_moments_mean_variance(model, mgf_kind)
    return exact_moments_variance(model, mgf_kind)


def _proxy_args_mean_variance(a: float, b: float) -> list[tuple[str, float]]:
    return [(f"order {n}", 0.5 * n * n * a * a + n * b) for n in range(1, 5)]


def proxy_moments_mean_variance(
    p: MeanVarianceProxy, law: MixingLaw, mgf_kind: MgfKind
) -> MomentSet:
    """Moments of W = exp(a sqrt(Y) N + b Y + c) + d.

    E[W^n] expands over the shift d with MGF arguments n^2 a^2/2 + n b.
    """
    labeled = _proxy_args_mean_variance(p.a, p.b)
    if mgf_kind is MgfKind.EXACT:
        _check_domain(labeled, law.mgf_domain_bound)
    phi = [law.mgf_eval(arg, mgf_kind) for _, arg in labeled]
    values = []
    for n in range(1, 5):
        total = 0.0
        for j in range(n + 1):
            i = n - j
            base = phi[i - 1] * math.exp(i * p.c) if i > 0 else 1.0
            total += comb(n, j) * (p.d**j) * base
        values.append(total)
    return MomentSet(tuple(values), MomentMode.MEAN_VARIANCE, mgf_kind, tuple(labeled))


def proxy_moments_variance(p: VarianceProxy, law: MixingLaw, mgf_kind: MgfKind) -> MomentSet:
    """Moments of W = exp(a sqrt(Y) N + b) + c (constant drift term b)."""
    labeled = [(f"order {n}", 0.5 * n * n * p.a * p.a) for n in range(1, 4)]
    if mgf_kind is MgfKind.EXACT:
        _check_domain(labeled, law.mgf_domain_bound)
    phi = [law.mgf_eval(arg, mgf_kind) for _, arg in labeled]
    values = []
    for n in range(1, 4):
        total = 0.0
        for j in range(n + 1):
            i = n - j
            base = phi[i - 1] * math.exp(i * p.b) if i > 0 else 1.0
            total += comb(n, j) * (p.c**j) * base
        values.append(total)
    return MomentSet(tuple(values), MomentMode.VARIANCE, mgf_kind, tuple(labeled))


def proxy_moments_elliptical(p: EllipticalProxy, law: MixingLaw, tol: float = 1e-12) -> MomentSet:
    """Moments of W = exp(a sqrt(R) U1 + b) + c via the circle series."""
    labeled = [(f"order {n}", float(n * n) * p.a * p.a) for n in range(1, 4)]
    series = [circle_mgf(law, x, tol=tol) for _, x in labeled]
    values = []
    for n in range(1, 4):
        total = 0.0
        for j in range(n + 1):
            i = n - j
            base = series[i - 1] * math.exp(i * p.b) if i > 0 else 1.0
            total += comb(n, j) * (p.c**j) * base
        values.append(total)
    return MomentSet(tuple(values), MomentMode.ELLIPTICAL, MgfKind.EXACT, tuple(labeled))
