"""Poisson negative log-likelihood and the hybrid potential."""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from .curve import LatentField
from .errors import ConfigurationError, DomainError
from .forward import FarFieldMap, IntensityVector, forward_operator
from .prior import TVSpec, tv_seminorm

__all__ = [
    "PoissonObservation",
    "PotentialValue",
    "poisson_potential",
    "hybrid_potential",
    "HybridPotential",
]


@dataclass(frozen=True)
class PoissonObservation:
    """Photon counts ``y`` with the geometry they were recorded in."""

    y: np.ndarray
    obs_dirs: np.ndarray | None = None
    tau: float | None = None
    incident_dirs: np.ndarray | None = None

    def __post_init__(self):
        y = np.asarray(self.y)
        if y.ndim != 1 or (y.size and (not np.all(np.equal(np.floor(y), y)) or y.min() < 0)):
            raise ConfigurationError("counts must be a vector of nonnegative integers")
        y = y.astype(np.int64)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class PotentialValue:
    lambda_used: IntensityVector
    log_likelihood_potential: float
    tv_penalty: float
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.log_likelihood_potential + self.tv_penalty)


def poisson_potential(lam, y) -> float:
    """``sum_j lam_j - y_j log lam_j`` with ``0 log 0 = 0``.

    Returns ``+inf`` when some ``lam_j = 0`` has ``y_j > 0``.
    """
    lam = np.asarray(getattr(lam, "values", lam), dtype=float)
    y = np.asarray(getattr(y, "y", y))
    if lam.shape != y.shape:
        raise ConfigurationError(f"intensity shape {lam.shape} does not match counts {y.shape}")
    if np.any(lam < 0):
        raise DomainError("negative intensity")
    with np.errstate(divide="ignore"):
        return float(np.sum(lam) - np.sum(xlogy(y, lam)))


def hybrid_potential(r: LatentField, y: PoissonObservation, fmap: FarFieldMap,
                     positivity=None, tv: TVSpec = TVSpec()) -> PotentialValue:
    lam = forward_operator(r, fmap, positivity)
    return PotentialValue(lam, poisson_potential(lam, y), tv_seminorm(r, tv))


class HybridPotential:
    """Callable ``r -> Psi(r, y)`` with a small chain-local cache.

    Not shared between chains; each chain builds its own instance.
    """

    def __init__(self, y: PoissonObservation, fmap: FarFieldMap, positivity=None,
                 tv: TVSpec = TVSpec(), cache_size: int = 8):
        if len(y.y) != fmap.n_data:
            raise ConfigurationError(
                f"{len(y.y)} counts but the forward map produces {fmap.n_data} values")
        self.y = y
        self.fmap = fmap
        self.positivity = positivity
        self.tv = tv
        self.cache_size = cache_size
        self._cache: OrderedDict[bytes, PotentialValue] = OrderedDict()
        self.n_evaluations = 0

    def evaluate(self, r: LatentField) -> PotentialValue:
        key = r.values.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        self.n_evaluations += 1
        val = hybrid_potential(r, self.y, self.fmap, self.positivity, self.tv)
        self._cache[key] = val
        if len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)
        return val

    def __call__(self, r: LatentField) -> float:
        return self.evaluate(r).total
