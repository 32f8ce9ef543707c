"""Perturbational attenuation model for dielectric image lines.

Both loss channels are first-order estimates: dielectric loss weighted by the
power fraction in the core, conductor loss from the surface resistance of the
image plane scaled by a Hammerstad-Jensen roughness factor. They reproduce
trends and orders of magnitude, not measured curves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C0, ETA0, MU0, NP_TO_DB
from .errors import InputError
from .modesolver import ImageLineGeometry, ModeSolution, beta_profile, image_line_mode
from .netcore import as_grid


@dataclass(frozen=True, eq=False)
class PropagationProfile:
    """Complex propagation coefficient gamma = alpha + j beta on a grid.

    ``alpha`` in Np/m (>= 0), ``beta`` in rad/m (> 0, strictly increasing).
    """

    grid: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        grid = as_grid(self.grid)
        alpha = np.array(np.broadcast_to(np.asarray(self.alpha, dtype=float), grid.shape))
        beta = np.array(np.broadcast_to(np.asarray(self.beta, dtype=float), grid.shape))
        if np.any(alpha < 0) or not np.all(np.isfinite(alpha)):
            raise InputError("alpha must be finite and >= 0")
        if np.any(beta <= 0) or np.any(np.diff(beta) <= 0):
            raise InputError("beta must be > 0 and strictly increasing")
        alpha.flags.writeable = beta.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def gamma(self) -> np.ndarray:
        return self.alpha + 1j * self.beta

    @property
    def alpha_db_per_cm(self) -> np.ndarray:
        return np_per_m_to_db_per_cm(self.alpha)


def np_per_m_to_db_per_cm(x):
    return np.asarray(x) * NP_TO_DB / 100.0


def db_per_cm_to_np_per_m(x):
    return np.asarray(x) * 100.0 / NP_TO_DB


def dielectric_alpha(geom: ImageLineGeometry, mode: ModeSolution):
    """alpha_d = (pi f / c) * (eps_r tan_delta / n_eff) * conf_total, Np/m."""
    return (np.pi * mode.f / C0) * (geom.eps_r * geom.tan_delta / mode.n_eff) * mode.conf_total


def skin_depth(f, sigma):
    return 1.0 / np.sqrt(np.pi * f * MU0 * sigma)


def surface_resistance(f, sigma):
    return np.sqrt(np.pi * f * MU0 / sigma)


def roughness_factor(rq, delta_s):
    """Hammerstad-Jensen factor K = 1 + (2/pi) atan(1.4 (Rq/delta_s)^2), in [1, 2)."""
    rq = np.asarray(rq, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rq == 0, 0.0, rq / delta_s)
    return 1.0 + (2.0 / math.pi) * np.arctan(1.4 * ratio ** 2)


def conductor_alpha(geom: ImageLineGeometry, mode: ModeSolution):
    """Image-plane conductor loss in Np/m.

    Order-of-magnitude estimate: the ground-plane surface resistance, weighted
    by the confinement, normalized by the effective modal height
    ``b + 1/gamma_y``.
    """
    f = mode.f
    rs = surface_resistance(f, geom.conductor_sigma)
    k = roughness_factor(geom.roughness_rq, skin_depth(f, geom.conductor_sigma))
    b_eff = geom.height_b + 1.0 / mode.gamma_y
    return k * rs * mode.conf_total / (ETA0 * mode.n_eff * b_eff)


def total_alpha_profile(geom: ImageLineGeometry, grid) -> PropagationProfile:
    f = as_grid(grid)
    mode = image_line_mode(geom, f)
    alpha = np.atleast_1d(dielectric_alpha(geom, mode) + conductor_alpha(geom, mode))
    return PropagationProfile(f, alpha, beta_profile(geom, f))
