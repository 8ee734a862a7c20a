"""Gaussian priors on the latent field and the total-variation penalty."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .curve import LatentField, PeriodicGrid
from .errors import ConfigurationError, NumericalError

__all__ = [
    "KLPriorSpec",
    "SEPriorSpec",
    "TVSpec",
    "sample_kl",
    "sample_se",
    "se_covariance",
    "tv_seminorm",
    "kl_expansion",
]


@dataclass(frozen=True)
class KLPriorSpec:
    """Truncated Karhunen-Loeve prior whose second derivative has law N(0, A^-s).

    Mode ``n`` has standard deviation ``n^-(s+2) / sqrt(pi)``; the constant
    mode has standard deviation ``mean_mode_std``.
    """

    s: float = 2.0
    n_modes: int = 30
    mean_mode_std: float = 0.5

    kind = "kl"

    def __post_init__(self):
        if not self.s > 0.5:
            raise ConfigurationError(f"smoothness s must exceed 1/2, got {self.s}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ConfigurationError(f"n_modes must be a positive integer, got {self.n_modes}")
        if not self.mean_mode_std >= 0:
            raise ConfigurationError("mean_mode_std must be nonnegative")
        object.__setattr__(self, "n_modes", int(self.n_modes))

    def mode_std(self) -> np.ndarray:
        n = np.arange(1, self.n_modes + 1)
        return n ** -(self.s + 2.0) / np.sqrt(np.pi)

    def pointwise_variance(self) -> float:
        return self.mean_mode_std**2 + float(np.sum(self.mode_std() ** 2))

    def sample(self, grid: PeriodicGrid, rng: np.random.Generator) -> LatentField:
        return sample_kl(self, grid, rng)

    def to_dict(self) -> dict:
        return {"kind": "kl", "s": self.s, "n_modes": self.n_modes,
                "mean_mode_std": self.mean_mode_std}


@dataclass(frozen=True)
class SEPriorSpec:
    """Zero-mean Gaussian with ``C(s, t) = exp(-2 sin^2((t - s)/2) / l^2)``."""

    length_scale: float = 0.5

    kind = "se"

    def __post_init__(self):
        if not self.length_scale > 0:
            raise ConfigurationError(f"length scale must be positive, got {self.length_scale}")

    def pointwise_variance(self) -> float:
        return 1.0

    def sample(self, grid: PeriodicGrid, rng: np.random.Generator) -> LatentField:
        return sample_se(self, grid, rng)

    def to_dict(self) -> dict:
        return {"kind": "se", "length_scale": self.length_scale}


@dataclass(frozen=True)
class TVSpec:
    zeta: float = 0.0

    def __post_init__(self):
        if not self.zeta >= 0:
            raise ConfigurationError(f"TV weight must be nonnegative, got {self.zeta}")


def sample_kl(spec: KLPriorSpec, grid: PeriodicGrid, rng: np.random.Generator) -> LatentField:
    """One draw ``r = s0 a0 + sum_n sigma_n (a_n cos nt + b_n sin nt)``.

    Normals are consumed in the order ``a0, a_1..a_n, b_1..b_n``.
    """
    if spec.n_modes >= grid.n_points // 2:
        raise ConfigurationError(
            f"n_modes={spec.n_modes} must be below N/2={grid.n_points // 2}")
    z = rng.standard_normal(2 * spec.n_modes + 1)
    a0, a, b = z[0], z[1:spec.n_modes + 1], z[spec.n_modes + 1:]
    return LatentField(grid, kl_expansion(spec, grid, a0, a, b))


def kl_expansion(spec: KLPriorSpec, grid: PeriodicGrid, a0, a, b) -> np.ndarray:
    """Evaluate the truncated expansion for given coefficients.

    ``a0`` has shape ``(...)`` and ``a``, ``b`` shape ``(..., n_modes)``;
    the result has shape ``(..., N)``.
    """
    n = np.arange(1, spec.n_modes + 1)
    nt = np.outer(n, grid.nodes)
    sig = spec.mode_std()
    a0 = np.asarray(a0, dtype=float)
    return (spec.mean_mode_std * a0[..., None]
            + (sig * np.asarray(a)) @ np.cos(nt) + (sig * np.asarray(b)) @ np.sin(nt))


def se_covariance(spec: SEPriorSpec, grid: PeriodicGrid) -> np.ndarray:
    t = grid.nodes
    return np.exp(-2.0 * np.sin((t[:, None] - t[None, :]) / 2) ** 2 / spec.length_scale**2)


@lru_cache(maxsize=32)
def _se_sqrt_spectrum(length_scale: float, n_points: int) -> np.ndarray:
    t = 2 * np.pi * np.arange(n_points) / n_points
    row = np.exp(-2.0 * np.sin(t / 2) ** 2 / length_scale**2)
    eig = np.fft.fft(row).real
    if eig.min() < -1e-8:
        raise NumericalError(
            f"covariance is not positive semi-definite (eigenvalue {eig.min():.3g})")
    out = np.sqrt(np.clip(eig, 0.0, None))
    out.setflags(write=False)
    return out


def sample_se(spec: SEPriorSpec, grid: PeriodicGrid, rng: np.random.Generator) -> LatentField:
    """Exact draw via the circulant square root ``F* diag(sqrt(eig)) F``."""
    root = _se_sqrt_spectrum(float(spec.length_scale), grid.n_points)
    z = rng.standard_normal(grid.n_points)
    return LatentField(grid, np.fft.ifft(root * np.fft.fft(z)).real)


def _trig_eval(coef: np.ndarray, n_points: int, t: np.ndarray, order: int) -> np.ndarray:
    """``order``-th derivative of the real trigonometric interpolant at ``t``."""
    k = np.arange(1, len(coef))
    e = np.exp(1j * np.outer(t, k))
    val = 2.0 * np.real(e @ (coef[1:] * (1j * k) ** order)) / n_points
    if order == 0:
        val = val + coef[0].real / n_points
    return val


def tv_seminorm(r: LatentField, spec: TVSpec) -> float:
    """``zeta * int_0^{2pi} |r'(t)| dt`` for the trigonometric interpolant of ``r``.

    ``r'`` is the spectral derivative (Nyquist mode dropped). The integral is
    evaluated exactly as the sum of ``|r(z_{j+1}) - r(z_j)|`` over consecutive
    zeros ``z_j`` of ``r'``; a plain trapezoid rule on ``|r'|`` is only second
    order accurate because of the kinks at those zeros.
    """
    if spec.zeta == 0:
        return 0.0
    n = r.grid.n_points
    coef = np.fft.rfft(r.values)[: n // 2]
    if np.max(np.abs(coef[1:]), initial=0.0) <= 1e-14 * max(1.0, abs(coef[0])):
        return 0.0
    up = 16 * n
    k = np.arange(n // 2)
    dfine = np.fft.irfft(1j * k * coef, n=up) * (up / n)
    sign = np.signbit(dfine)
    idx = np.flatnonzero(sign != np.roll(sign, -1))
    if idx.size == 0:
        return 0.0
    h = 2 * np.pi / up
    d0, d1 = dfine[idx], dfine[(idx + 1) % up]
    z = h * (idx + d0 / (d0 - d1))
    lo, hi = h * idx, h * (idx + 1)
    for _ in range(4):
        f1 = _trig_eval(coef, n, z, 1)
        f2 = _trig_eval(coef, n, z, 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(f2 != 0, f1 / f2, 0.0)
        z = np.clip(z - step, lo, hi)
    vals = _trig_eval(coef, n, z, 0)
    return float(spec.zeta * np.sum(np.abs(np.diff(np.append(vals, vals[0])))))
