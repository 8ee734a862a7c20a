"""Closed-form solutions for the sound-soft circle.

Independent of the Nystrom code: everything here is a Fourier series in
Bessel and Hankel functions.
"""
from __future__ import annotations

import numpy as np
from scipy.special import hankel1, h1vp, jv, jvp

__all__ = ["mie_far_field", "mie_scattered_field", "circle_density"]


def _orders(n_terms):
    return np.arange(-n_terms, n_terms + 1)


def mie_far_field(radius, k, obs_angles, inc_angle=0.0, n_terms=40):
    """Far field of a sound-soft circle centred at the origin."""
    n = _orders(n_terms)
    kr = k * radius
    coef = jv(n, kr) / hankel1(n, kr)
    phase = np.exp(1j * np.outer(np.asarray(obs_angles) - inc_angle, n))
    return -np.sqrt(2 / (np.pi * k)) * np.exp(-0.25j * np.pi) * phase @ coef


def mie_scattered_field(radius, k, points, inc_angle=0.0, n_terms=40):
    pts = np.atleast_2d(points)
    rho = np.hypot(pts[:, 0], pts[:, 1])
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    n = _orders(n_terms)
    coef = -(1j**n) * jv(n, k * radius) / hankel1(n, k * radius)
    terms = hankel1(n[None, :], k * rho[:, None]) * np.exp(1j * np.outer(theta - inc_angle, n))
    return terms @ coef


def circle_density(radius, k, eta, angles, inc_angle=0.0, n_terms=40):
    """Exact solution of ``(I + K - i eta S) phi = -2 u_inc`` on a circle.

    On the circle both layer operators are diagonal in ``exp(i n theta)``:
    ``S_n = i pi R J_n H_n`` and ``K_n = (i pi k R / 2)(J_n' H_n + J_n H_n')``.
    """
    n = _orders(n_terms)
    kr = k * radius
    J, H = jv(n, kr), hankel1(n, kr)
    S = 1j * np.pi * radius * J * H
    K = 0.5j * np.pi * kr * (jvp(n, kr) * H + J * h1vp(n, kr))
    coef = -2 * (1j**n) * J / (1 + K - 1j * eta * S)
    return np.exp(1j * np.outer(np.asarray(angles) - inc_angle, n)) @ coef
