"""Sound-soft scattering by the combined-field Nystrom method.

The density ``phi`` solves ``(I + K - i eta S) phi = -2 u_inc`` on the
boundary. Logarithmic singularities of the Hankel kernels are split off and
integrated with trigonometric (Kussmaul-Martensen) weights; the smooth
remainders use the trapezoidal rule, which gives super-algebraic convergence
on analytic curves.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from scipy.special import hankel1, j0, j1, y0, y1

from .curve import (BoundaryCurve, ErfMap, ExpMap, LatentField, PeriodicGrid,
                    radial_to_boundary)
from .errors import ConfigurationError, DomainError, NumericalError

__all__ = [
    "FarFieldMap",
    "DensitySolution",
    "FarField",
    "IntensityVector",
    "unit_directions",
    "log_weights",
    "assemble_cfie",
    "solve_density",
    "far_field",
    "eval_scattered_field",
    "intensity",
    "solve_far_field",
    "forward_operator",
]

EULER_GAMMA = 0.57721566490153286061


def unit_directions(angles) -> np.ndarray:
    a = np.atleast_1d(np.asarray(angles, dtype=float))
    return np.column_stack([np.cos(a), np.sin(a)])


def _unit_rows(v, name):
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if v.ndim != 2 or v.shape[1] != 2 or len(v) == 0:
        raise ConfigurationError(f"{name} must be a non-empty list of 2-vectors")
    if np.max(np.abs(np.hypot(v[:, 0], v[:, 1]) - 1.0)) > 1e-12:
        raise ConfigurationError(f"{name} must be unit vectors")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class FarFieldMap:
    """Configuration of the forward map ``r -> tau |u_inf|^2 + e``.

    ``eta=None`` selects ``eta = k``; ``obs_dirs=None`` selects ``m``
    equispaced directions at angles ``2 pi j / m``.
    """

    k: float = 1.0
    incident_dirs: np.ndarray = field(default_factory=lambda: np.array([[1.0, 0.0]]))
    eta: float | None = None
    obs_dirs: np.ndarray | None = None
    tau: float = 1000.0
    shift: np.ndarray | float = 0.0
    m: int = 64

    def __post_init__(self):
        if not self.k > 0:
            raise ConfigurationError(f"wavenumber must be positive, got {self.k}")
        if not self.tau > 0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "tau", float(self.tau))
        if self.eta is None:
            object.__setattr__(self, "eta", self.k)
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "incident_dirs",
                           _unit_rows(self.incident_dirs, "incident_dirs"))
        if self.obs_dirs is None:
            if int(self.m) < 1:
                raise ConfigurationError("need at least one observation direction")
            obs = unit_directions(2 * np.pi * np.arange(int(self.m)) / int(self.m))
        else:
            obs = self.obs_dirs
        obs = _unit_rows(obs, "obs_dirs")
        object.__setattr__(self, "obs_dirs", obs)
        object.__setattr__(self, "m", len(obs))
        e = np.broadcast_to(np.asarray(self.shift, dtype=float), (self.n_data,)).copy()
        if np.any(e < 0) or not np.all(np.isfinite(e)):
            raise ConfigurationError("shift must be finite and nonnegative")
        e.setflags(write=False)
        object.__setattr__(self, "shift", e)

    @property
    def n_data(self) -> int:
        return self.m * len(self.incident_dirs)

    @property
    def obs_angles(self) -> np.ndarray:
        return np.mod(np.arctan2(self.obs_dirs[:, 1], self.obs_dirs[:, 0]), 2 * np.pi)


@dataclass(frozen=True)
class DensitySolution:
    """Boundary density ``phi(x(t_i))``; one column per incident direction."""

    grid: PeriodicGrid
    phi: np.ndarray


@dataclass(frozen=True)
class FarField:
    """``values[j, l] = u_inf(obs_dirs[j]; incident_dirs[l])``."""

    values: np.ndarray


@dataclass(frozen=True)
class IntensityVector:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise NumericalError("intensity must be finite and nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@lru_cache(maxsize=16)
def log_weights(n_points: int) -> np.ndarray:
    """Circulant weights for ``int ln(4 sin^2((t - s)/2)) f(s) ds``.

    Returns the ``N x N`` matrix ``R[i, j] = R_{|i-j|}``, exact for
    trigonometric polynomials of degree below ``N/2``.
    """
    n = n_points // 2
    d = np.pi * np.arange(n_points) / n
    m = np.arange(1, n)
    row = (-2 * np.pi / n) * (np.cos(np.outer(d, m)) / m).sum(axis=1) \
        - (np.pi / n**2) * np.cos(n * d)
    idx = np.arange(n_points)
    R = row[np.abs(idx[:, None] - idx[None, :])]
    R.setflags(write=False)
    return R


@lru_cache(maxsize=16)
def _log_sin2(n_points: int) -> np.ndarray:
    t = 2 * np.pi * np.arange(n_points) / n_points
    with np.errstate(divide="ignore"):
        L = np.log(4 * np.sin((t[:, None] - t[None, :]) / 2) ** 2)
    np.fill_diagonal(L, 0.0)
    L.setflags(write=False)
    return L


def assemble_cfie(curve: BoundaryCurve, k: float, eta: float) -> np.ndarray:
    """Nystrom matrix of ``I + K - i eta S`` on ``curve``."""
    N = curve.grid.n_points
    x = curve.points
    jac = curve.jacobian
    nvec = curve.scaled_normals
    iu, ju = np.triu_indices(N, 1)

    diff = x[:, None, :] - x[None, :, :]          # x(t_i) - x(t_j)
    dist_u = np.hypot(diff[iu, ju, 0], diff[iu, ju, 1])
    if np.any(dist_u == 0):
        bad = np.argmin(dist_u)
        raise NumericalError(f"coincident nodes {iu[bad]} and {ju[bad]}")
    kr = k * dist_u
    J0u, Y0u, J1u, Y1u = j0(kr), y0(kr), j1(kr), y1(kr)

    def sym(vals):
        A = np.zeros((N, N))
        A[iu, ju] = vals
        A[ju, iu] = vals
        return A

    r = sym(dist_u)
    np.fill_diagonal(r, 1.0)
    J0, Y0 = sym(J0u), sym(Y0u)
    J1r, Y1r = sym(J1u / dist_u), sym(Y1u / dist_u)
    ndot = np.einsum("ijk,jk->ij", diff, nvec)    # n(t_j) . (x(t_i) - x(t_j))
    logm = _log_sin2(N)

    # double layer
    L = 0.5j * k * ndot * (J1r + 1j * Y1r)
    L1 = -k / (2 * np.pi) * ndot * J1r
    L2 = L - L1 * logm
    # single layer
    M = 0.5j * (J0 + 1j * Y0) * jac[None, :]
    M1 = -(J0 * jac[None, :]) / (2 * np.pi)
    M2 = M - M1 * logm

    with np.errstate(divide="ignore", invalid="ignore"):
        curv = np.einsum("ij,ij->i", nvec, curve.accel) / jac**2
        m2d = (0.5j - EULER_GAMMA / np.pi - np.log(0.5 * k * jac) / np.pi) * jac
    degenerate = jac == 0
    curv[degenerate] = 0.0
    m2d[degenerate] = 0.0
    di = np.diag_indices(N)
    L1[di] = 0.0
    L2[di] = curv / (2 * np.pi)
    M1[di] = -jac / (2 * np.pi)
    M2[di] = m2d

    A = log_weights(N) * (L1 - 1j * eta * M1) + (2 * np.pi / N) * (L2 - 1j * eta * M2)
    A[di] += 1.0
    if not np.all(np.isfinite(A)):
        i, j = np.argwhere(~np.isfinite(A))[0]
        raise NumericalError(f"non-finite kernel entry at node pair ({i}, {j})")
    return A


def solve_density(matrix: np.ndarray, curve: BoundaryCurve, k: float, d) -> DensitySolution:
    """Solve for the density with right-hand side ``-2 exp(i k x . d)``.

    ``d`` is a unit 2-vector or an ``(L, 2)`` array of them.
    """
    d = np.atleast_2d(np.asarray(d, dtype=float))
    rhs = -2.0 * np.exp(1j * k * curve.points @ d.T)
    try:
        lu, piv = sla.lu_factor(matrix, check_finite=True)
    except ValueError as exc:
        raise NumericalError(str(exc)) from None
    gecon = sla.get_lapack_funcs("gecon", (lu,))
    rcond, _ = gecon(lu, np.linalg.norm(matrix, 1), norm="1")
    if not rcond > 1e-13:
        raise NumericalError(f"system is singular to working precision "
                             f"(condition estimate {1 / max(rcond, 1e-300):.3g})")
    phi = sla.lu_solve((lu, piv), rhs)
    res = np.linalg.norm(matrix @ phi - rhs) / np.linalg.norm(rhs)
    if not res <= 1e-10:
        raise NumericalError(f"relative residual {res:.3g} exceeds 1e-10 "
                             f"(condition estimate {1 / rcond:.3g})")
    return DensitySolution(curve.grid, phi)


def far_field(phi: DensitySolution, curve: BoundaryCurve, k: float, eta: float,
              obs_dirs) -> FarField:
    obs = np.atleast_2d(np.asarray(obs_dirs, dtype=float))
    w = 2 * np.pi / curve.grid.n_points
    weight = k * obs @ curve.scaled_normals.T + eta * curve.jacobian[None, :]
    kernel = weight * np.exp(-1j * k * obs @ curve.points.T)
    c = np.exp(-0.25j * np.pi) / np.sqrt(8 * np.pi * k)
    values = c * w * (kernel @ phi.phi)
    if not np.all(np.isfinite(values)):
        raise NumericalError("non-finite far field")
    return FarField(values)


def _inside(curve: BoundaryCurve, pts: np.ndarray) -> np.ndarray:
    """Winding-number test against the sampled polygon."""
    rel = curve.points[None, :, :] - pts[:, None, :]
    ang = np.arctan2(rel[..., 1], rel[..., 0])
    dang = np.diff(np.concatenate([ang, ang[:, :1]], axis=1), axis=1)
    dang = (dang + np.pi) % (2 * np.pi) - np.pi
    return np.abs(dang.sum(axis=1)) > np.pi


def eval_scattered_field(phi: DensitySolution, curve: BoundaryCurve, k: float, eta: float,
                         points) -> np.ndarray:
    """Scattered field at exterior points; shape ``(n_points, n_incident)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    diff = pts[:, None, :] - curve.points[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    h = curve.grid.spacing * np.max(curve.jacobian)
    if np.any(dist.min(axis=1) <= h) or np.any(_inside(curve, pts)):
        raise DomainError("evaluation points must lie strictly outside the obstacle, "
                          "more than one grid spacing from the boundary")
    kr = k * dist
    ndot = np.einsum("pjk,jk->pj", diff, curve.scaled_normals)
    kern = (0.25j * k * hankel1(1, kr) / dist * ndot
            + 0.25 * eta * hankel1(0, kr) * curve.jacobian[None, :])
    return curve.grid.spacing * kern @ phi.phi


def intensity(ff: FarField, tau: float, shift=0.0) -> IntensityVector:
    """``tau |u_inf|^2 + e``, concatenated incident direction by incident direction."""
    vals = tau * np.abs(np.asarray(ff.values).T.ravel()) ** 2
    return IntensityVector(vals + np.asarray(shift, dtype=float))


def solve_far_field(curve: BoundaryCurve, fmap: FarFieldMap) -> FarField:
    A = assemble_cfie(curve, fmap.k, fmap.eta)
    sol = solve_density(A, curve, fmap.k, fmap.incident_dirs)
    return far_field(sol, curve, fmap.k, fmap.eta, fmap.obs_dirs)


def forward_operator(r: LatentField, fmap: FarFieldMap, positivity=None) -> IntensityVector:
    """Latent field to expected counts, through the positivity map."""
    if positivity is None:
        positivity = ExpMap()
    elif not isinstance(positivity, (ExpMap, ErfMap)):
        raise ConfigurationError(f"unsupported positivity map {positivity!r}")
    curve = radial_to_boundary(positivity(r))
    return intensity(solve_far_field(curve, fmap), fmap.tau, fmap.shift)
