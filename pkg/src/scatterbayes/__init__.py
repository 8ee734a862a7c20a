"""Bayesian shape reconstruction of sound-soft obstacles from Poisson far-field data."""
from .curve import (BoundaryCurve, ErfMap, ErfMapParams, ExpMap, LatentField, PeriodicGrid,
                    RadialCurve, obstacle_catalog, radial_to_boundary, spectral_derivative)
from .errors import (ChainError, ConfigurationError, DomainError, NumericalError,
                     ScatterError)
from .forward import FarFieldMap, forward_operator, solve_far_field
from .mcmc import ChainConfig, ChainResult, run_chain, summarize
from .posterior import HybridPotential, PoissonObservation, poisson_potential
from .prior import KLPriorSpec, SEPriorSpec, TVSpec, sample_kl, sample_se, tv_seminorm

__version__ = "0.1.0"

__all__ = [
    "BoundaryCurve",
    "ChainConfig",
    "ChainError",
    "ChainResult",
    "ConfigurationError",
    "DomainError",
    "ErfMap",
    "ErfMapParams",
    "ExpMap",
    "FarFieldMap",
    "HybridPotential",
    "KLPriorSpec",
    "LatentField",
    "NumericalError",
    "PeriodicGrid",
    "PoissonObservation",
    "RadialCurve",
    "SEPriorSpec",
    "ScatterError",
    "TVSpec",
    "forward_operator",
    "obstacle_catalog",
    "poisson_potential",
    "radial_to_boundary",
    "run_chain",
    "sample_kl",
    "sample_se",
    "solve_far_field",
    "spectral_derivative",
    "summarize",
    "tv_seminorm",
]
