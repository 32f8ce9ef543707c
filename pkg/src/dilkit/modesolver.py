"""Dominant-mode solver for dielectric image lines.

The conductor is replaced by its mirror image, giving a free-standing
rectangular guide of width ``a`` and height ``2b``. That guide is solved with
the effective-dielectric-constant method: first the vertical slab (thickness
2b, E normal to the slab faces), then a horizontal slab of width ``a`` whose
core index is the effective index of the first step.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import C0
from .errors import InputError, NoConvergence
from .netcore import as_grid

E_NORMAL = "E-normal"  # TM slab mode
E_PARALLEL = "E-parallel"  # TE slab mode
MAX_BISECTIONS = 200

DEFAULT_WIDTH = 1.295e-3


@dataclass(frozen=True)
class ImageLineGeometry:
    """Cross-section and material data of a DIL (SI units)."""

    width_a: float = DEFAULT_WIDTH
    height_b: float = DEFAULT_WIDTH / 4
    eps_r: float = 2.2
    tan_delta: float = 1e-4
    conductor_sigma: float = 5.8e7
    roughness_rq: float = 0.5e-6
    eps_clad: float = 1.0

    def __post_init__(self):
        if not (self.width_a > 0 and self.height_b > 0):
            raise InputError("width_a and height_b must be > 0")
        if not self.eps_clad >= 1.0:
            raise InputError("eps_clad must be >= 1")
        if not self.eps_r > self.eps_clad:
            raise InputError("eps_r must exceed eps_clad for a guided mode")
        if not self.tan_delta >= 0:
            raise InputError("tan_delta must be >= 0")
        if not self.conductor_sigma > 0:
            raise InputError("conductor_sigma must be > 0")
        if not self.roughness_rq >= 0:
            raise InputError("roughness_rq must be >= 0")
        if abs(self.width_a / self.height_b / 4.0 - 1.0) > 0.2:
            warnings.warn(
                f"aspect ratio a/b = {self.width_a / self.height_b:.3g} is far from 4",
                stacklevel=3,
            )

    @property
    def n_core(self) -> float:
        return math.sqrt(self.eps_r)

    @property
    def n_clad(self) -> float:
        return math.sqrt(self.eps_clad)


@dataclass(frozen=True)
class ModeSolution:
    """Dominant-mode data; fields are scalars or arrays matching ``f``."""

    f: np.ndarray
    n_eff: np.ndarray
    gamma_x: np.ndarray
    gamma_y: np.ndarray
    conf_x: np.ndarray
    conf_y: np.ndarray
    n_eff_y: np.ndarray  # vertical-slab effective index (core index of the second stage)

    @property
    def conf_total(self):
        return self.conf_x * self.conf_y

    @property
    def beta(self):
        return 2 * np.pi * self.f * self.n_eff / C0


def _slab_residual(phi, V, r):
    # (u sin u - r w cos u) / V with u = V cos(phi), w = V sin(phi); zero at even modes
    u = V * np.cos(phi)
    return np.cos(phi) * np.sin(u) - r * np.sin(phi) * np.cos(u)


def slab_neff(thickness, n_core, n_clad, polarization, f, *, return_residual=False):
    """Fundamental even mode of a symmetric slab.

    Parameters
    ----------
    thickness : float or array
        Slab thickness in m.
    n_core, n_clad : float or array
        Refractive indices, ``n_core > n_clad``.
    polarization : {"E-normal", "E-parallel"}
        Electric field normal (TM) or parallel (TE) to the slab faces.
    f : float or array
        Frequency in Hz.

    Returns
    -------
    n_eff, decay, confinement
        Effective index, exterior field decay rate (1/m) and the fraction of
        modal power carried inside the core. All broadcast over the inputs.

    The normalized wavenumbers ``u = kx*d/2`` and ``w = gamma*d/2`` satisfy
    ``u^2 + w^2 = V^2``; writing ``u = V cos(phi)``, the fundamental even mode
    lies where ``0 < u < min(V, pi/2)``, on which the residual falls from
    positive to negative exactly once. Bisection in ``phi`` stays well
    conditioned for both weak (``V -> 0``) and strong guidance.
    """
    if polarization not in (E_NORMAL, E_PARALLEL):
        raise ValueError(f"polarization must be {E_NORMAL!r} or {E_PARALLEL!r}")
    d, n1, n2, f = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (thickness, n_core, n_clad, f)))
    if np.any(n1 <= n2) or np.any(f <= 0) or np.any(d <= 0):
        raise InputError("slab_neff needs n_core > n_clad, f > 0 and thickness > 0")

    k0 = 2 * np.pi * f / C0
    half = d / 2
    contrast = n1 * n1 - n2 * n2
    V = k0 * half * np.sqrt(contrast)
    r = np.ones_like(V) if polarization == E_PARALLEL else (n1 / n2) ** 2

    lo = np.arccos(np.minimum(1.0, np.pi / (2 * V)))
    hi = np.full_like(V, np.pi / 2)
    for it in range(MAX_BISECTIONS + 1):
        mid = 0.5 * (lo + hi)
        active = (mid > lo) & (mid < hi)
        if not np.any(active):
            break
        pos = _slab_residual(mid, V, r) > 0
        lo = np.where(active & pos, mid, lo)
        hi = np.where(active & ~pos, mid, hi)
    else:
        raise NoConvergence(f"slab bisection exceeded {MAX_BISECTIONS} iterations")

    # pick the bracket end with the smaller residual
    res_lo = np.abs(_slab_residual(lo, V, r))
    res_hi = np.abs(_slab_residual(hi, V, r))
    phi = np.where(res_lo <= res_hi, lo, hi)
    u, w = V * np.cos(phi), V * np.sin(phi)

    n_eff = np.sqrt(n2 * n2 + contrast * np.sin(phi) ** 2)
    decay = w / half
    # power in core vs cladding; TM fields weighted by 1/n^2
    core = 1.0 + np.sinc(2 * u / np.pi)
    q = np.ones_like(V) if polarization == E_PARALLEL else (n1 / n2) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        clad = np.where(w > 0, q * np.cos(u) ** 2 / w, np.inf)
    conf = core / (core + clad)

    out = tuple(x[()] for x in (n_eff, decay, conf))
    if return_residual:
        return out + (np.minimum(res_lo, res_hi)[()],)
    return out


def _edc_mode(width, height, n_core, n_clad, f) -> ModeSolution:
    n_y, gamma_y, conf_y = slab_neff(2 * height, n_core, n_clad, E_NORMAL, f)
    n_eff, gamma_x, conf_x = slab_neff(width, n_y, n_clad, E_PARALLEL, f)
    return ModeSolution(np.asarray(f, dtype=float)[()], n_eff, gamma_x, gamma_y, conf_x, conf_y, n_y)


def image_line_mode(geom: ImageLineGeometry, f) -> ModeSolution:
    """Solve the dominant DIL mode at frequency ``f`` (scalar or array, Hz)."""
    if np.any(np.asarray(f) <= 0):
        raise InputError("frequency must be > 0")
    return _edc_mode(geom.width_a, geom.height_b, geom.n_core, geom.n_clad, f)


def beta_profile(geom: ImageLineGeometry, grid) -> np.ndarray:
    """Phase coefficient beta(f) = 2 pi f n_eff / c in rad/m on ``grid``."""
    f = as_grid(grid)
    beta = np.atleast_1d(image_line_mode(geom, f).beta)
    if np.any(np.diff(beta) <= 0):
        raise NoConvergence("beta profile is not strictly increasing")
    return beta
