"""Preconditioned Crank-Nicolson Metropolis-Hastings over the latent field."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .curve import ErfMap, ExpMap, LatentField, PeriodicGrid, RadialCurve
from .errors import ChainError, ConfigurationError, ScatterError
from .prior import KLPriorSpec, SEPriorSpec, TVSpec

__all__ = [
    "ChainConfig",
    "ChainResult",
    "pcn_propose",
    "accept_probability",
    "run_chain",
    "summarize",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChainConfig:
    beta: float = 0.03
    n_iters: int = 50_000
    burn_in: int = 10_000
    thin: int = 10
    seed: int = 0
    prior: KLPriorSpec | SEPriorSpec = field(default_factory=SEPriorSpec)
    positivity: ExpMap | ErfMap = field(default_factory=ErfMap)
    tv: TVSpec = field(default_factory=TVSpec)

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ConfigurationError(f"beta must lie in (0, 1], got {self.beta}")
        if not 0 <= self.burn_in < self.n_iters:
            raise ConfigurationError("need 0 <= burn_in < n_iters")
        if self.thin < 1:
            raise ConfigurationError("thin must be >= 1")

    @property
    def n_retained(self) -> int:
        return (self.n_iters - self.burn_in) // self.thin


@dataclass
class ChainResult:
    grid: PeriodicGrid
    samples: np.ndarray            # (n_retained, N) latent values
    acceptance_rate: float
    potential_trace: np.ndarray    # potential of the current state after each iteration
    positivity: ExpMap | ErfMap
    n_failures: int = 0
    mean_curve: RadialCurve | None = None
    band_lo: np.ndarray | None = None
    band_hi: np.ndarray | None = None

    @property
    def latent_samples(self) -> list[LatentField]:
        return [LatentField(self.grid, s) for s in self.samples]


def pcn_propose(r: LatentField, beta: float, prior_sample: LatentField) -> LatentField:
    """``sqrt(1 - beta^2) r + beta xi``."""
    return LatentField(r.grid, math.sqrt(1.0 - beta * beta) * r.values
                       + beta * prior_sample.values)


def accept_probability(psi_current: float, psi_proposed: float) -> float:
    if math.isnan(psi_current) or math.isnan(psi_proposed):
        raise ChainError("NaN potential")
    if psi_proposed == math.inf:
        return 0.0
    if psi_current == math.inf:
        return 1.0
    return math.exp(min(0.0, psi_current - psi_proposed))


def run_chain(cfg: ChainConfig, potential: Callable[[LatentField], float],
              grid: PeriodicGrid, *, progress: Callable | None = None,
              progress_every: int = 1000, rng: np.random.Generator | None = None,
              summarize_result: bool = True) -> ChainResult:
    """Sample ``exp(-potential) d(prior)`` with pCN proposals.

    The initial state is a prior draw. Each iteration draws the proposal noise
    and then the uniform variate from the chain's generator. A proposal whose
    potential raises a :class:`ScatterError` counts as a rejection.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    prior = cfg.prior
    current = prior.sample(grid, rng)
    psi = float(potential(current))
    if math.isnan(psi):
        raise ChainError("NaN potential at the initial state")
    scale = math.sqrt(1.0 - cfg.beta**2)

    kept = np.empty((cfg.n_retained, grid.n_points))
    trace = np.empty(cfg.n_iters)
    accepted = failures = n_kept = 0
    for i in range(cfg.n_iters):
        xi = prior.sample(grid, rng)
        u = rng.uniform()
        proposal = LatentField(grid, scale * current.values + cfg.beta * xi.values)
        try:
            psi_prop = float(potential(proposal))
        except ScatterError as exc:
            failures += 1
            log.debug("forward failure at iteration %d: %s", i, exc)
            if i >= 99 and failures > 0.5 * (i + 1):
                raise ChainError(f"{failures} of {i + 1} proposals failed in the forward "
                                 f"solver; last error: {exc}") from exc
        else:
            if u <= accept_probability(psi, psi_prop):
                current, psi = proposal, psi_prop
                accepted += 1
        trace[i] = psi
        if i >= cfg.burn_in and (i - cfg.burn_in + 1) % cfg.thin == 0:
            kept[n_kept] = current.values
            n_kept += 1
        if progress is not None and (i + 1) % progress_every == 0:
            progress(i + 1, psi, accepted / (i + 1))
    result = ChainResult(grid, kept, accepted / cfg.n_iters, trace, cfg.positivity, failures)
    if summarize_result and n_kept >= 100:
        result.mean_curve, result.band_lo, result.band_hi = summarize(
            kept, cfg.positivity, grid)
    return result


def summarize(samples, positivity, grid: PeriodicGrid | None = None):
    """Pointwise mean radius and 2.5%/97.5% quantile band.

    ``samples`` is an ``(S, N)`` array of latent values or a list of
    :class:`LatentField`.
    """
    if len(samples) and isinstance(samples[0], LatentField):
        grid = samples[0].grid
        samples = np.array([s.values for s in samples])
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or len(samples) < 100:
        raise ConfigurationError(f"need at least 100 retained samples, got {len(samples)}")
    if grid is None:
        grid = PeriodicGrid(samples.shape[1])
    q = positivity.radius(samples)
    mean = RadialCurve(grid, q.mean(axis=0))
    lo, hi = np.quantile(q, [0.025, 0.975], axis=0)
    return mean, lo, hi
