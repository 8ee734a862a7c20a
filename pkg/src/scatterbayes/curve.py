"""Periodic grids, star-shaped curves and the benchmark obstacles.

Every curve lives on a uniform periodic grid ``t_i = 2*pi*i/N``. Radial
curves are mapped to Cartesian boundary curves carrying first and second
derivatives, which is what the Nystrom assembly in :mod:`scatterbayes.forward`
needs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.special import erf

from .errors import ConfigurationError, DomainError

__all__ = [
    "PeriodicGrid",
    "LatentField",
    "RadialCurve",
    "BoundaryCurve",
    "ErfMapParams",
    "ExpMap",
    "ErfMap",
    "spectral_derivative",
    "latent_to_radius_exp",
    "latent_to_radius_erf",
    "radial_to_boundary",
    "obstacle_catalog",
    "catalog_radius",
    "OBSTACLES",
]

# exp overflows float64 a little above 709
_EXP_LIMIT = 700.0


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform grid of ``n_points`` nodes on ``[0, 2*pi)``."""

    n_points: int = 128

    def __post_init__(self):
        n = self.n_points
        if int(n) != n or n < 8 or n % 2:
            raise ConfigurationError(
                f"grid size must be an even integer >= 8, got {n!r}")
        object.__setattr__(self, "n_points", int(n))

    @property
    def nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_points) / self.n_points

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_points


def _as_grid_vector(grid: PeriodicGrid, values, name: str) -> np.ndarray:
    v = np.array(values, dtype=float)
    v.setflags(write=False)
    if v.shape != (grid.n_points,):
        raise ConfigurationError(
            f"{name} must have shape ({grid.n_points},), got {v.shape}")
    return v


@dataclass(frozen=True)
class LatentField:
    """The unknown ``r`` sampled at the grid nodes."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        v = _as_grid_vector(self.grid, self.values, "latent values")
        if not np.all(np.isfinite(v)):
            raise DomainError("latent field contains non-finite values")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class RadialCurve:
    """Star-shaped curve ``q(t) (cos t, sin t)`` with ``q > 0``."""

    grid: PeriodicGrid
    q: np.ndarray
    q_prime: np.ndarray | None = None

    def __post_init__(self):
        q = _as_grid_vector(self.grid, self.q, "radius")
        if not np.all(q > 0):
            raise DomainError("radius must be strictly positive")
        object.__setattr__(self, "q", q)
        if self.q_prime is None:
            qp = spectral_derivative(q)
        else:
            qp = self.q_prime
        object.__setattr__(self, "q_prime", _as_grid_vector(self.grid, qp, "q_prime"))


@dataclass(frozen=True)
class BoundaryCurve:
    """Closed curve sampled for Nystrom discretisation.

    ``points``, ``tangents`` and ``accel`` hold ``x(t_i)``, ``x'(t_i)`` and
    ``x''(t_i)`` as ``(N, 2)`` arrays. ``normals`` are outward unit normals.
    Graded parameterisations of curves with corners have ``jacobian == 0`` at
    the corner node; the unit normal there is set to zero and the node carries
    no quadrature weight.
    """

    grid: PeriodicGrid
    points: np.ndarray
    tangents: np.ndarray
    accel: np.ndarray
    smooth: bool = True
    name: str = ""
    jacobian: np.ndarray = field(init=False)
    normals: np.ndarray = field(init=False)

    def __post_init__(self):
        shape = (self.grid.n_points, 2)
        for attr in ("points", "tangents", "accel"):
            a = np.array(getattr(self, attr), dtype=float)
            if a.shape != shape:
                raise ConfigurationError(f"{attr} must have shape {shape}, got {a.shape}")
            a.setflags(write=False)
            object.__setattr__(self, attr, a)
        tx, ty = self.tangents[:, 0], self.tangents[:, 1]
        jac = np.hypot(tx, ty)
        if self.smooth and not np.all(jac > 0):
            raise DomainError("parameterisation is not regular (|x'| = 0)")
        # (x2', -x1') is outward for counter-clockwise curves
        x, y = self.points[:, 0], self.points[:, 1]
        area2 = np.sum(x * ty - y * tx)
        orient = 1.0 if area2 > 0 else -1.0
        raw = orient * np.column_stack([ty, -tx])
        with np.errstate(invalid="ignore", divide="ignore"):
            nu = np.where(jac[:, None] > 0, raw / jac[:, None], 0.0)
        jac.setflags(write=False)
        nu.setflags(write=False)
        object.__setattr__(self, "jacobian", jac)
        object.__setattr__(self, "normals", nu)

    @property
    def scaled_normals(self) -> np.ndarray:
        """Outward normals multiplied by ``|x'|``, i.e. ``nu(t) |x'(t)|``."""
        return self.normals * self.jacobian[:, None]

    @cached_property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)


def spectral_derivative(values) -> np.ndarray:
    """Derivative of periodic samples on the uniform grid via the FFT.

    Exact for trigonometric polynomials of degree below ``N/2``. The Nyquist
    coefficient is dropped so real input gives real output.
    """
    v = np.asarray(values, dtype=float)
    n = v.shape[-1]
    if n % 2:
        raise ConfigurationError(f"spectral differentiation needs even N, got {n}")
    coef = np.fft.rfft(v, axis=-1)
    wave = 1j * np.arange(n // 2 + 1)
    wave[-1] = 0.0
    return np.fft.irfft(coef * wave, n=n, axis=-1)


@dataclass(frozen=True)
class ErfMapParams:
    a: float = 2.0
    b: float = 2.0

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigurationError(f"erf map needs a > 0, got {self.a}")
        if not self.b > 1:
            raise ConfigurationError(f"erf map needs b > 1, got {self.b}")

    @property
    def bounds(self) -> tuple[float, float]:
        return 0.5 * self.a * (self.b - 1.0), 0.5 * self.a * (self.b + 1.0)


def latent_to_radius_exp(r: LatentField) -> RadialCurve:
    """``q = exp(r)``; ``q' = q r'``."""
    if np.max(r.values) > _EXP_LIMIT:
        raise DomainError(
            f"latent value {np.max(r.values):.3g} overflows the exponential map")
    q = np.exp(r.values)
    return RadialCurve(r.grid, q, q * spectral_derivative(r.values))


def latent_to_radius_erf(r: LatentField, p: ErfMapParams) -> RadialCurve:
    """``q = (a/2)(erf(r) + b)``, bounded in ``((a/2)(b-1), (a/2)(b+1))``."""
    q = 0.5 * p.a * (erf(r.values) + p.b)
    qp = p.a / np.sqrt(np.pi) * spectral_derivative(r.values) * np.exp(-r.values**2)
    return RadialCurve(r.grid, q, qp)


class ExpMap:
    """Positivity map ``q = exp(r)``."""

    name = "exp"

    def __call__(self, r: LatentField) -> RadialCurve:
        return latent_to_radius_exp(r)

    def radius(self, values: np.ndarray) -> np.ndarray:
        return np.exp(np.asarray(values))

    def to_dict(self) -> dict:
        return {"map": "exp"}

    def __eq__(self, other):
        return isinstance(other, ExpMap)

    def __repr__(self):
        return "ExpMap()"


class ErfMap:
    """Positivity map ``q = (a/2)(erf(r) + b)``."""

    name = "erf"

    def __init__(self, a: float = 2.0, b: float = 2.0):
        self.params = ErfMapParams(float(a), float(b))

    def __call__(self, r: LatentField) -> RadialCurve:
        return latent_to_radius_erf(r, self.params)

    def radius(self, values: np.ndarray) -> np.ndarray:
        return 0.5 * self.params.a * (erf(np.asarray(values)) + self.params.b)

    def to_dict(self) -> dict:
        return {"map": "erf", "a": self.params.a, "b": self.params.b}

    def __eq__(self, other):
        return isinstance(other, ErfMap) and other.params == self.params

    def __repr__(self):
        return f"ErfMap(a={self.params.a}, b={self.params.b})"


def radial_to_boundary(c: RadialCurve, name: str = "") -> BoundaryCurve:
    t = c.grid.nodes
    cos, sin = np.cos(t), np.sin(t)
    q, qp = c.q, c.q_prime
    qpp = spectral_derivative(qp)
    return BoundaryCurve(
        c.grid,
        points=np.column_stack([q * cos, q * sin]),
        tangents=np.column_stack([qp * cos - q * sin, qp * sin + q * cos]),
        accel=np.column_stack([(qpp - q) * cos - 2 * qp * sin,
                               (qpp - q) * sin + 2 * qp * cos]),
        name=name,
    )


# -- benchmark obstacles -----------------------------------------------------
# Each entry returns (x, x', x'') evaluated at parameter values t, each (len(t), 2).

def _radial_param(q, dq, ddq):
    def param(t):
        cos, sin = np.cos(t), np.sin(t)
        r0, r1, r2 = q(t), dq(t), ddq(t)
        x = np.column_stack([r0 * cos, r0 * sin])
        xp = np.column_stack([r1 * cos - r0 * sin, r1 * sin + r0 * cos])
        xpp = np.column_stack([(r2 - r0) * cos - 2 * r1 * sin,
                               (r2 - r0) * sin + 2 * r1 * cos])
        return x, xp, xpp
    return param


def _peanut_q(t):
    return 3.0 * (np.cos(t) ** 2 + 0.25 * np.sin(t) ** 2)


# 3(cos^2 + sin^2/4) = 1.875 + 1.125 cos 2t
_peanut = _radial_param(
    _peanut_q,
    lambda t: -2.25 * np.sin(2 * t),
    lambda t: -4.5 * np.cos(2 * t),
)


def _cloverleaf_q(t):
    return 1.0 + 0.3 * np.cos(4 * t)


_cloverleaf = _radial_param(
    _cloverleaf_q,
    lambda t: -1.2 * np.sin(4 * t),
    lambda t: -4.8 * np.cos(4 * t),
)


def _kite(t):
    x = np.column_stack([np.cos(t) + 0.65 * np.cos(2 * t) - 0.65, 1.5 * np.sin(t)])
    xp = np.column_stack([-np.sin(t) - 1.3 * np.sin(2 * t), 1.5 * np.cos(t)])
    xpp = np.column_stack([-np.cos(t) - 2.6 * np.cos(2 * t), -1.5 * np.sin(t)])
    return x, xp, xpp


def _drop(t):
    x = np.column_stack([-1.0 + 2.0 * np.sin(t / 2), -np.sin(t)])
    xp = np.column_stack([np.cos(t / 2), -np.cos(t)])
    xpp = np.column_stack([-0.5 * np.sin(t / 2), np.sin(t)])
    return x, xp, xpp


@dataclass(frozen=True)
class _Obstacle:
    param: Callable
    smooth: bool
    radius: Callable | None = None


OBSTACLES = {
    "peanut": _Obstacle(_peanut, True, _peanut_q),
    "kite": _Obstacle(_kite, True),
    "drop": _Obstacle(_drop, False),
    "cloverleaf": _Obstacle(_cloverleaf, True, _cloverleaf_q),
}


def _grading(s, order):
    """Polynomial substitution ``w`` of ``[0, 2pi]`` clustering nodes at 0.

    Returns ``w, w', w''``; ``w`` and its first ``order - 1`` derivatives
    vanish at ``s = 0`` (and ``2pi``).
    """
    p = float(order)
    c = 1.0 / p - 0.5

    def v(x):
        u = (np.pi - x) / np.pi
        return (c * u**3 + (x - np.pi) / (p * np.pi) + 0.5,
                -3 * c * u**2 / np.pi + 1.0 / (p * np.pi),
                6 * c * u / np.pi**2)

    v0, v1, v2 = v(s)
    u0, u1, u2 = v(2 * np.pi - s)
    u1 = -u1
    A = v0**p
    B = u0**p
    A1 = p * v0 ** (p - 1) * v1
    B1 = p * u0 ** (p - 1) * u1
    A2 = p * (p - 1) * v0 ** (p - 2) * v1**2 + p * v0 ** (p - 1) * v2
    B2 = p * (p - 1) * u0 ** (p - 2) * u1**2 + p * u0 ** (p - 1) * u2
    S = A + B
    num1 = A1 * B - A * B1
    w = 2 * np.pi * A / S
    w1 = 2 * np.pi * num1 / S**2
    w2 = 2 * np.pi * ((A2 * B - A * B2) * S - 2 * num1 * (A1 + B1)) / S**3
    return w, w1, w2


def obstacle_catalog(name: str, grid: PeriodicGrid, grading_order: int | None = None
                     ) -> BoundaryCurve:
    """Benchmark obstacle sampled on ``grid``.

    Curves with a corner (the drop) are graded towards the corner with a
    polynomial substitution of order ``grading_order`` (default 3); pass 0 to
    sample the raw parameterisation. Smooth curves ignore ``grading_order``
    unless it is given explicitly.
    """
    try:
        obs = OBSTACLES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown obstacle {name!r}; valid names: {', '.join(OBSTACLES)}") from None
    if grading_order is None:
        grading_order = 0 if obs.smooth else 3
    s = grid.nodes
    if grading_order:
        if grading_order < 2:
            raise ConfigurationError("grading order must be >= 2")
        w, w1, w2 = _grading(s, grading_order)
        x, xp, xpp = obs.param(w)
        accel = xpp * (w1**2)[:, None] + xp * w2[:, None]
        xp = xp * w1[:, None]
        smooth = False
    else:
        x, xp, accel = obs.param(s)
        smooth = obs.smooth
    return BoundaryCurve(grid, x, xp, accel, smooth=smooth, name=name)


def catalog_radius(name: str, angles) -> np.ndarray | None:
    """Polar radius of a catalog obstacle at the given polar angles.

    Exact for radially defined obstacles. For the others the curve is sampled
    finely and the radius interpolated in polar angle; ``None`` is returned if
    the curve is not star-shaped about the origin.
    """
    obs = OBSTACLES[name]
    angles = np.mod(np.asarray(angles, dtype=float), 2 * np.pi)
    if obs.radius is not None:
        return obs.radius(angles)
    t = np.linspace(0.0, 2 * np.pi, 8192, endpoint=False)
    x, _, _ = obs.param(t)
    phi = np.unwrap(np.arctan2(x[:, 1], x[:, 0]))
    if np.any(np.diff(phi) <= 0):
        return None
    rho = np.hypot(x[:, 0], x[:, 1])
    phi0 = phi[0]
    period_phi = np.concatenate([phi - phi0, [2 * np.pi]])
    period_rho = np.concatenate([rho, [rho[0]]])
    return np.interp(np.mod(angles - phi0, 2 * np.pi), period_phi, period_rho)
