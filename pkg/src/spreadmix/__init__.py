"""Spread option pricing under normal mean-variance mixture models.

Semi-closed prices via moment-matched shifted-exponential proxies, with a
Monte Carlo engine for validation and a CLI for single contracts and the
built-in benchmark tables.
"""

from .errors import (
    ConfigError,
    MgfDomainError,
    NoSolutionError,
    QuadratureError,
    SeriesDivergenceError,
    SpreadMixError,
)
from .laws import (
    CustomLaw,
    Degenerate,
    Exponential,
    Gamma,
    IGParameterization,
    InverseGaussian,
    MgfKind,
    MixingLaw,
    MomentTable,
    circle_mgf,
    law_from_name,
)
from .market import EffectiveModel, ModelSpec, SpreadContract, build_effective, martingale_drift
from .matching import (
    MatchOptions,
    MatchReport,
    match_elliptical,
    match_mean_variance,
    match_variance,
    reduced_residuals,
)
from .mc import McEstimate, mc_moments, mc_proxy_price, mc_spread_price, mc_spread_prices
from .moments import (
    MomentMode,
    MomentSet,
    exact_moments,
    exact_moments_elliptical,
    exact_moments_mean_variance,
    exact_moments_variance,
    proxy_moments_elliptical,
    proxy_moments_mean_variance,
    proxy_moments_variance,
)
from .pricing import (
    PriceBranch,
    PriceReport,
    mixture_expectation,
    price_elliptical,
    price_mean_variance,
    price_spread_approx,
    price_variance,
    radial_density_h,
)
from .proxy import EllipticalProxy, MeanVarianceProxy, VarianceProxy
from .tables import TABLES, BenchmarkTable, TableRow, get_table, model_spec_for_row

__version__ = "0.1.0"
