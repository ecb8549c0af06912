"""Mixing distributions for normal mean-variance mixture models.

A mixing law is the positive random variable that randomizes the Gaussian
scale in a mean-variance mixture (conventionally written ``Y``, or ``R`` in
the elliptical variant).  Every law exposes the five capabilities the rest
of the library builds on:

* the moment generating function together with an explicit finiteness
  bound ``D`` (the MGF is finite on ``(-inf, D)`` and infinite beyond),
* raw moments ``E[Y^k]``,
* a density on ``(0, inf)``,
* an exact sampler driven by an explicit RNG state,
* a fourth-order Taylor polynomial stand-in for the MGF that is finite
  for every real argument.

Laws are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .errors import SeriesDivergenceError

__all__ = [
    "MgfKind",
    "IGParameterization",
    "MixingLaw",
    "Exponential",
    "Gamma",
    "InverseGaussian",
    "Degenerate",
    "CustomLaw",
    "MomentTable",
    "law_from_name",
    "circle_mgf",
    "as_generator",
]

_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


class MgfKind(Enum):
    """Which MGF evaluation a computation uses: the closed form or its
    fourth-order Taylor polynomial (finite for all real arguments)."""

    EXACT = "exact"
    TRUNCATED = "truncated"


class IGParameterization(Enum):
    MEAN_SHAPE = "mean_shape"
    DELTA_GAMMA = "delta_gamma"


def as_generator(rng) -> np.random.Generator:
    """Coerce an int seed or Generator into a Generator.

    Integer seeds key a counter-based Philox stream so parallel callers can
    derive independent, reproducible streams from (seed, stream index).
    """
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.Philox(key=int(rng)))


class MixingLaw(ABC):
    """Interface shared by all mixing distributions."""

    @property
    @abstractmethod
    def mgf_domain_bound(self) -> float:
        """Supremum D of arguments where E[exp(s Y)] is finite (may be inf)."""

    @abstractmethod
    def mgf(self, s: float) -> float:
        """E[exp(s Y)]; returns inf for s >= D rather than raising."""

    @abstractmethod
    def mgf_derivative(self, s: float) -> float:
        """d/ds E[exp(s Y)] on the interior of the domain."""

    @abstractmethod
    def raw_moment(self, k: int) -> float:
        """E[Y^k] for integer k >= 0; raises if unavailable or not finite."""

    @abstractmethod
    def density(self, y):
        """Density at y (0 for y <= 0 by convention)."""

    @abstractmethod
    def sample(self, n: int, rng) -> np.ndarray:
        """n i.i.d. draws, deterministic given the RNG state."""

    # The point mass location for degenerate laws; None for proper densities.
    atom: float | None = None

    def raw_moment_ratio(self, k: int) -> float:
        """E[Y^(k+1)] / E[Y^k]; overridden where a stable closed form exists."""
        return self.raw_moment(k + 1) / self.raw_moment(k)

    def truncated_mgf(self, s: float) -> float:
        """Fourth-order Taylor polynomial of the MGF about 0.

        1 + s E[Y] + s^2 E[Y^2]/2 + s^3 E[Y^3]/6 + s^4 E[Y^4]/24, defined for
        every real s.  Within the MGF domain it agrees with the closed form
        to a fifth-order remainder.
        """
        m1, m2, m3, m4 = (self.raw_moment(k) for k in range(1, 5))
        return 1.0 + s * m1 + s * s * m2 / 2.0 + s**3 * m3 / 6.0 + s**4 * m4 / 24.0

    def truncated_mgf_derivative(self, s: float) -> float:
        m1, m2, m3, m4 = (self.raw_moment(k) for k in range(1, 5))
        return m1 + s * m2 + s * s * m3 / 2.0 + s**3 * m4 / 6.0

    def mgf_eval(self, s: float, kind: MgfKind) -> float:
        return self.mgf(s) if kind is MgfKind.EXACT else self.truncated_mgf(s)

    def mgf_eval_derivative(self, s: float, kind: MgfKind) -> float:
        if kind is MgfKind.EXACT:
            return self.mgf_derivative(s)
        return self.truncated_mgf_derivative(s)

    def describe(self) -> str:
        return repr(self)


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0.0:
        raise ValueError(f"{name} must be > 0, got {value}")
    return value


@dataclass(frozen=True)
class Exponential(MixingLaw):
    """Exponential(rate): density rate*exp(-rate*y), MGF rate/(rate-s)."""

    rate: float = 1.0
    atom = None

    def __post_init__(self):
        _positive("rate", self.rate)

    @property
    def mgf_domain_bound(self) -> float:
        return self.rate

    def mgf(self, s: float) -> float:
        if s >= self.rate:
            return math.inf
        return self.rate / (self.rate - s)

    def mgf_derivative(self, s: float) -> float:
        if s >= self.rate:
            return math.inf
        return self.rate / (self.rate - s) ** 2

    def raw_moment(self, k: int) -> float:
        # k! / rate^k via lgamma so large orders fail loudly, not silently
        log_m = math.lgamma(k + 1) - k * math.log(self.rate)
        if log_m > _LOG_FLOAT_MAX:
            raise ValueError(f"moment of order {k} is not representable")
        return math.exp(log_m)

    def raw_moment_ratio(self, k: int) -> float:
        return (k + 1) / self.rate

    def density(self, y):
        y = np.asarray(y, dtype=float)
        out = np.where(y > 0.0, self.rate * np.exp(-self.rate * np.maximum(y, 0.0)), 0.0)
        return out if out.ndim else float(out)

    def sample(self, n: int, rng) -> np.ndarray:
        # inverse CDF: -ln(1-U)/rate
        u = as_generator(rng).random(n)
        return -np.log1p(-u) / self.rate


@dataclass(frozen=True)
class Gamma(MixingLaw):
    """Gamma(shape, scale): MGF (1 - scale*s)^(-shape), mean shape*scale."""

    shape: float
    scale: float = 1.0
    atom = None

    def __post_init__(self):
        _positive("shape", self.shape)
        _positive("scale", self.scale)

    @property
    def mgf_domain_bound(self) -> float:
        return 1.0 / self.scale

    def mgf(self, s: float) -> float:
        if s >= 1.0 / self.scale:
            return math.inf
        return (1.0 - self.scale * s) ** (-self.shape)

    def mgf_derivative(self, s: float) -> float:
        if s >= 1.0 / self.scale:
            return math.inf
        return self.shape * self.scale * (1.0 - self.scale * s) ** (-self.shape - 1.0)

    def raw_moment(self, k: int) -> float:
        log_m = k * math.log(self.scale) + math.lgamma(self.shape + k) - math.lgamma(self.shape)
        if log_m > _LOG_FLOAT_MAX:
            raise ValueError(f"moment of order {k} is not representable")
        return math.exp(log_m)

    def raw_moment_ratio(self, k: int) -> float:
        return self.scale * (self.shape + k)

    def density(self, y):
        y = np.asarray(y, dtype=float)
        ys = np.maximum(y, 1e-300)
        log_f = (
            (self.shape - 1.0) * np.log(ys)
            - ys / self.scale
            - math.lgamma(self.shape)
            - self.shape * math.log(self.scale)
        )
        out = np.where(y > 0.0, np.exp(np.minimum(log_f, _LOG_FLOAT_MAX - 1.0)), 0.0)
        return out if out.ndim else float(out)

    def sample(self, n: int, rng) -> np.ndarray:
        return as_generator(rng).gamma(self.shape, self.scale, size=n)


@dataclass(frozen=True)
class InverseGaussian(MixingLaw):
    """Inverse Gaussian mixing law.

    Two common coordinate systems name the same two-parameter family:

    * ``MEAN_SHAPE``: (p1, p2) = (mu, lam) with density
      sqrt(lam/(2 pi y^3)) exp(-lam (y-mu)^2 / (2 mu^2 y)) and bound
      D = lam / (2 mu^2).
    * ``DELTA_GAMMA``: (p1, p2) = (delta, gam), the same family through
      (mu, lam) = (delta/gam, delta^2), with bound D = gam^2 / 2.

    The parameterization tag is carried through to reports because the two
    conventions assign different distributions to the same numeral pair.
    """

    p1: float
    p2: float
    parameterization: IGParameterization = IGParameterization.MEAN_SHAPE
    atom = None

    def __post_init__(self):
        _positive("p1", self.p1)
        _positive("p2", self.p2)

    @property
    def _mu_lam(self) -> tuple[float, float]:
        if self.parameterization is IGParameterization.MEAN_SHAPE:
            return self.p1, self.p2
        return self.p1 / self.p2, self.p1 * self.p1

    @property
    def mgf_domain_bound(self) -> float:
        mu, lam = self._mu_lam
        return lam / (2.0 * mu * mu)

    def mgf(self, s: float) -> float:
        mu, lam = self._mu_lam
        if s >= self.mgf_domain_bound:
            return math.inf
        root = math.sqrt(1.0 - 2.0 * mu * mu * s / lam)
        return math.exp((lam / mu) * (1.0 - root))

    def mgf_derivative(self, s: float) -> float:
        mu, lam = self._mu_lam
        if s >= self.mgf_domain_bound:
            return math.inf
        root = math.sqrt(1.0 - 2.0 * mu * mu * s / lam)
        return self.mgf(s) * mu / root

    def _moments_upto(self, k: int) -> list[float]:
        # m_{j+1} = (2j-1) (mu^2/lam) m_j + mu^2 m_{j-1}
        mu, lam = self._mu_lam
        m = [1.0, mu]
        for j in range(1, k):
            m.append((2 * j - 1) * (mu * mu / lam) * m[j] + mu * mu * m[j - 1])
        return m[: k + 1]

    def raw_moment(self, k: int) -> float:
        if k == 0:
            return 1.0
        val = self._moments_upto(k)[k]
        if not math.isfinite(val):
            raise ValueError(f"moment of order {k} is not representable")
        return val

    def raw_moment_ratio(self, k: int) -> float:
        # ratio recurrence r_j = (2j-1) mu^2/lam + mu^2 / r_{j-1}; overflow-free
        mu, lam = self._mu_lam
        r = mu
        for j in range(1, k + 1):
            r = (2 * j - 1) * mu * mu / lam + mu * mu / r
        return r

    def density(self, y):
        mu, lam = self._mu_lam
        y = np.asarray(y, dtype=float)
        ys = np.maximum(y, 1e-300)
        log_f = (
            0.5 * math.log(lam / (2.0 * math.pi))
            - 1.5 * np.log(ys)
            - lam * (ys - mu) ** 2 / (2.0 * mu * mu * ys)
        )
        out = np.where(y > 0.0, np.exp(log_f), 0.0)
        return out if out.ndim else float(out)

    def sample(self, n: int, rng) -> np.ndarray:
        # transformation-with-roots: take the smaller root of the defining
        # quadratic, accept it with probability mu/(mu+x), else mu^2/x
        mu, lam = self._mu_lam
        gen = as_generator(rng)
        nu = gen.standard_normal(n) ** 2
        x = mu + mu * mu * nu / (2.0 * lam) - (mu / (2.0 * lam)) * np.sqrt(
            4.0 * mu * lam * nu + (mu * nu) ** 2
        )
        u = gen.random(n)
        return np.where(u <= mu / (mu + x), x, mu * mu / x)


@dataclass(frozen=True)
class Degenerate(MixingLaw):
    """Point mass at a positive value.

    Useful as the unit mixer (Y = 1 recovers plain lognormal dynamics,
    R = 1 recovers the uniform-circle factor alone).  It has no density;
    expectation routines branch on ``atom`` instead of integrating.
    """

    value: float = 1.0

    def __post_init__(self):
        _positive("value", self.value)

    @property
    def atom(self) -> float:  # type: ignore[override]
        return self.value

    @property
    def mgf_domain_bound(self) -> float:
        return math.inf

    def mgf(self, s: float) -> float:
        return math.exp(s * self.value)

    def mgf_derivative(self, s: float) -> float:
        return self.value * math.exp(s * self.value)

    def raw_moment(self, k: int) -> float:
        return self.value**k

    def raw_moment_ratio(self, k: int) -> float:
        return self.value

    def density(self, y):
        raise ValueError("a degenerate law has no density; use the atom directly")

    def sample(self, n: int, rng) -> np.ndarray:
        return np.full(n, self.value)


@dataclass(frozen=True)
class MomentTable:
    """Raw moments E[Y^k] for k = 0..k_max.

    Requires values[0] == 1, positivity, k_max >= 4, and Lyapunov
    log-convexity (E[Y^j]^2 <= E[Y^(j-1)] E[Y^(j+1)]), which every genuine
    moment sequence satisfies.
    """

    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) < 5:
            raise ValueError("moment table needs orders 0..4 at least (k_max >= 4)")
        if values[0] != 1.0:
            raise ValueError(f"values[0] must be 1 (E[Y^0]), got {values[0]}")
        if any(v <= 0.0 for v in values):
            raise ValueError("raw moments of a positive variable must be > 0")
        for j in range(1, len(values) - 1):
            lhs = values[j] ** 2
            rhs = values[j - 1] * values[j + 1]
            if lhs > rhs * (1.0 + 1e-9):
                raise ValueError(
                    f"moment sequence is not log-convex at order {j}: "
                    f"m[{j}]^2 = {lhs:.6g} > m[{j-1}]*m[{j+1}] = {rhs:.6g}"
                )

    @property
    def k_max(self) -> int:
        return len(self.values) - 1

    @classmethod
    def from_law(cls, law: MixingLaw, k_max: int = 8) -> "MomentTable":
        return cls(tuple(law.raw_moment(k) for k in range(k_max + 1)))


@dataclass(frozen=True)
class CustomLaw(MixingLaw):
    """User-supplied mixing law.

    All five capabilities are mandatory; a partially specified law is
    rejected at construction so downstream code never discovers a missing
    piece mid-computation.
    """

    mgf_fn: Callable[[float], float]
    domain_bound: float
    moments: MomentTable
    density_fn: Callable[[float], float]
    sampler: Callable[[int, np.random.Generator], np.ndarray]
    mgf_derivative_fn: Callable[[float], float] | None = None
    name: str = "custom"
    atom = None

    def __post_init__(self):
        missing = [
            label
            for label, value in (
                ("mgf_fn", self.mgf_fn),
                ("moments", self.moments),
                ("density_fn", self.density_fn),
                ("sampler", self.sampler),
            )
            if value is None
        ]
        if missing:
            raise ValueError(f"custom law is missing capabilities: {', '.join(missing)}")
        if not self.domain_bound > 0.0:
            raise ValueError(f"domain bound must be > 0, got {self.domain_bound}")
        probe = float(self.mgf_fn(0.0))
        if abs(probe - 1.0) > 1e-12:
            raise ValueError(f"mgf(0) must equal 1, got {probe}")

    @property
    def mgf_domain_bound(self) -> float:
        return self.domain_bound

    def mgf(self, s: float) -> float:
        if s >= self.domain_bound:
            return math.inf
        return float(self.mgf_fn(s))

    def mgf_derivative(self, s: float) -> float:
        if self.mgf_derivative_fn is not None:
            return float(self.mgf_derivative_fn(s))
        h = 1e-6 * max(1.0, abs(s))
        return (self.mgf(s + h) - self.mgf(s - h)) / (2.0 * h)

    def raw_moment(self, k: int) -> float:
        if k > self.moments.k_max:
            raise ValueError(
                f"moments unavailable: order {k} exceeds the supplied table "
                f"(k_max={self.moments.k_max})"
            )
        return self.moments.values[k]

    def density(self, y):
        y_arr = np.asarray(y, dtype=float)
        if y_arr.ndim == 0:
            return float(self.density_fn(float(y_arr))) if y_arr > 0.0 else 0.0
        return np.array([float(self.density_fn(v)) if v > 0.0 else 0.0 for v in y_arr])

    def sample(self, n: int, rng) -> np.ndarray:
        return np.asarray(self.sampler(n, as_generator(rng)), dtype=float)

    def __repr__(self) -> str:
        return f"CustomLaw(name={self.name!r}, D={self.domain_bound:.6g})"


def law_from_name(family: str, params: dict) -> MixingLaw:
    """Build a law from a config-style descriptor (family name + parameters)."""
    fam = family.strip().lower().replace("-", "_")
    if fam in ("exp", "exponential"):
        return Exponential(rate=float(params.get("rate", 1.0)))
    if fam == "gamma":
        return Gamma(shape=float(params["shape"]), scale=float(params.get("scale", 1.0)))
    if fam in ("ig", "inverse_gaussian", "inversegaussian"):
        tag = str(params.get("parameterization", "mean_shape")).strip().lower()
        try:
            parameterization = IGParameterization(tag)
        except ValueError:
            raise ValueError(
                f"unknown inverse Gaussian parameterization {tag!r} "
                f"(expected mean_shape or delta_gamma)"
            ) from None
        return InverseGaussian(
            p1=float(params["p1"]), p2=float(params["p2"]), parameterization=parameterization
        )
    if fam == "degenerate":
        return Degenerate(value=float(params.get("value", 1.0)))
    raise ValueError(f"unknown mixing law family {family!r}")


def circle_mgf(
    law: MixingLaw,
    squared_scale: float,
    *,
    tol: float = 1e-12,
    max_terms: int = 200,
    derivative: bool = False,
):
    """E[exp(sqrt(x) sqrt(R) U1)] for U uniform on the unit circle, R ~ law.

    Conditioning on R and averaging the circle coordinate gives the series

        sum_k x^k E[R^k] / (4^k (k!)^2),   x = squared_scale,

    because the even circle moments are E[U1^(2k)] = (2k)! / (4^k (k!)^2)
    (central binomial over 4^k; the naive per-coordinate double-factorial
    product overstates every order beyond the second) and odd moments
    vanish.  For R = 1 the series is the modified Bessel function
    I0(sqrt(x)).

    Terms accumulate until the next term falls below ``tol`` times the
    running sum, capped at ``max_terms``.  Three consecutive non-decreasing
    terms past order 20, or a cap hit while terms still grow, raise
    SeriesDivergenceError.

    With ``derivative=True`` returns (value, d/dx value).
    """
    x = float(squared_scale)
    if x < 0.0:
        raise ValueError(f"squared_scale must be >= 0, got {x}")
    if x == 0.0:
        return (1.0, law.raw_moment(1) / 4.0) if derivative else 1.0
    term = 1.0
    total = 1.0
    deriv = 0.0
    nondecreasing = 0
    growing = False
    for k in range(max_terms):
        nxt = term * x * law.raw_moment_ratio(k) / (4.0 * (k + 1) ** 2)
        total += nxt
        deriv += (k + 1) * nxt / x
        growing = abs(nxt) >= abs(term)
        if abs(nxt) < tol * abs(total):
            return (total, deriv) if derivative else total
        if k >= 20:
            nondecreasing = nondecreasing + 1 if growing else 0
            if nondecreasing >= 3:
                raise SeriesDivergenceError(
                    f"circle-mixture series diverges at order {k + 1} (x={x:.6g})"
                )
        term = nxt
    if growing:
        raise SeriesDivergenceError(
            f"circle-mixture series hit the {max_terms}-term cap while still growing (x={x:.6g})"
        )
    return (total, deriv) if derivative else total
