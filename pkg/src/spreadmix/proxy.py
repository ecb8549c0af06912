"""Parameter sets of the shifted-exponential proxy variables.

The spread is approximated by a random variable with a semi-closed option
price:

* mean-variance: W = exp(a sqrt(Y) N + b Y + c) + d
* variance:      W = exp(a sqrt(Y) N + b) + c
* elliptical:    W = exp(a sqrt(R) U1 + b) + c

``a`` may be taken nonnegative without loss (a*N and |a|*N are equal in
law).  Pricing requires a > 0 because the integral branch divides by a;
the moment formulas remain valid at a = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["MeanVarianceProxy", "VarianceProxy", "EllipticalProxy"]


def _check_scale(a: float) -> None:
    if a < 0.0:
        raise ValueError(f"a must be >= 0, got {a}")


@dataclass(frozen=True)
class MeanVarianceProxy:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        _check_scale(self.a)

    @property
    def shift(self) -> float:
        return self.d


@dataclass(frozen=True)
class VarianceProxy:
    a: float
    b: float
    c: float

    def __post_init__(self):
        _check_scale(self.a)

    @property
    def shift(self) -> float:
        return self.c


@dataclass(frozen=True)
class EllipticalProxy:
    a: float
    b: float
    c: float

    def __post_init__(self):
        _check_scale(self.a)

    @property
    def shift(self) -> float:
        return self.c
