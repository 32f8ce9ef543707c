"""Taper return loss and bend excess loss."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import ETA0
from .errors import AllNonPositive, FrequencyOutOfRange, InputError, InsufficientRadii, NonDecayingFit
from .modesolver import ImageLineGeometry, _edc_mode
from .netcore import as_grid


@dataclass(frozen=True)
class TaperSpec:
    """Linear height taper from ``start_height_fraction * b`` up to ``b``."""

    length_m: float
    start_height_fraction: float = 0.05
    sections: int = 64

    def __post_init__(self):
        if self.length_m < 0:
            raise InputError("taper length must be >= 0")
        if not 0 < self.start_height_fraction <= 1:
            raise InputError("start_height_fraction must be in (0, 1]")
        if int(self.sections) != self.sections or self.sections < 1:
            raise InputError("sections must be a positive integer")


def _heights(geom, taper):
    b0 = taper.start_height_fraction * geom.height_b
    mids = b0 + (geom.height_b - b0) * (np.arange(taper.sections) + 0.5) / taper.sections
    # input region, the sections, then the full-height line
    return np.concatenate([[b0], mids, [geom.height_b]])


def taper_reflection(geom: ImageLineGeometry, taper: TaperSpec, f):
    """Input reflection coefficient of a height taper at ``f`` (scalar or array).

    Each section is a uniform line with impedance proxy ``eta0 / n_eff``; the
    step reflections are combined back to front with the exact multi-section
    recursion ``G_i = (rho_i + G_{i+1} p^2) / (1 + rho_i G_{i+1} p^2)``.
    """
    f = np.atleast_1d(np.asarray(f, dtype=float))
    h = _heights(geom, taper)
    mode = _edc_mode(geom.width_a, h[:, None], geom.n_core, geom.n_clad, f[None, :])
    z = ETA0 / mode.n_eff  # (sections + 2, nf)
    beta = np.broadcast_to(mode.beta, z.shape)
    rho = (z[1:] - z[:-1]) / (z[1:] + z[:-1])
    dl = taper.length_m / taper.sections

    g = rho[-1].astype(complex)
    for i in range(taper.sections - 1, -1, -1):
        p2 = np.exp(-2j * beta[i + 1] * dl)
        g = (rho[i] + g * p2) / (1 + rho[i] * g * p2)
    return g[0] if g.size == 1 else g


def taper_sweep(geom: ImageLineGeometry, lengths, grid, start_height_fraction=0.05, sections=64):
    """Return loss in dB, shape ``(len(lengths), len(grid))``."""
    lengths = list(lengths)
    if not lengths:
        raise InputError("need at least one taper length")
    f = as_grid(grid)
    rl = np.empty((len(lengths), f.size))
    for i, length in enumerate(lengths):
        gam = np.atleast_1d(taper_reflection(geom, TaperSpec(length, start_height_fraction, sections), f))
        rl[i] = -20.0 * np.log10(np.abs(gam))
    return rl


@dataclass(frozen=True, eq=False)
class BendModel:
    """Per-frequency exponential bend excess loss ``a_db * exp(-r / r0_m)``."""

    grid: np.ndarray
    a_db: np.ndarray
    r0_m: np.ndarray

    def __post_init__(self):
        grid = as_grid(self.grid)
        a = np.asarray(self.a_db, dtype=float)
        r0 = np.asarray(self.r0_m, dtype=float)
        if a.shape != grid.shape or r0.shape != grid.shape:
            raise InputError("bend model arrays must match the grid")
        if np.any(a < 0) or np.any(r0 <= 0):
            raise InputError("bend model needs a_db >= 0 and r0_m > 0")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "a_db", a)
        object.__setattr__(self, "r0_m", r0)


def _bend_lstsq(radii, el):
    keep = el > 0
    r, y = radii[keep], np.log(el[keep])
    rm = r.mean()
    slope = ((r - rm) @ (y - y.mean())) / ((r - rm) @ (r - rm))
    intercept = y.mean() - slope * rm
    return slope, intercept, keep


def fit_bend_model(samples, grid=None) -> BendModel:
    """Fit ``ln EL = ln a - r / r0`` per frequency by least squares.

    ``samples`` is a list of ``(radius_m, excess_loss_db)`` with per-frequency
    excess-loss arrays; non-positive losses are left out of the fit.
    """
    samples = list(samples)
    radii = np.array([float(r) for r, _ in samples])
    if np.unique(radii).size < 2:
        raise InsufficientRadii("need at least two distinct radii")
    el = np.array([np.atleast_1d(np.asarray(e, dtype=float)) for _, e in samples])
    nf = el.shape[1]
    f = as_grid(grid) if grid is not None else as_grid(np.arange(1, nf + 1, dtype=float))
    if f.size != nf:
        raise InputError("excess-loss arrays do not match the grid")

    a = np.empty(nf)
    r0 = np.empty(nf)
    for k in range(nf):
        col = el[:, k]
        if np.unique(radii[col > 0]).size < 2:
            raise AllNonPositive(f"fewer than two positive excess losses at {f[k]:.6g} Hz")
        slope, intercept, _ = _bend_lstsq(radii, col)
        if slope >= 0:
            raise NonDecayingFit(f"excess loss does not decay with radius at {f[k]:.6g} Hz")
        a[k] = np.exp(intercept)
        r0[k] = -1.0 / slope
    return BendModel(f, a, r0)


def bend_residuals(model: BendModel, samples) -> np.ndarray:
    """``EL_measured - EL_model`` in dB, shape ``(n_radii, n_freq)``."""
    return np.array([np.asarray(e, dtype=float) - model.a_db * np.exp(-r / model.r0_m) for r, e in samples])


def _nearest_index(grid, f):
    k = int(np.argmin(np.abs(grid - f)))
    if grid.size == 1:
        ok = abs(f - grid[0]) <= 1e-9 * grid[0]
    else:
        lo_half = (grid[1] - grid[0]) / 2
        hi_half = (grid[-1] - grid[-2]) / 2
        ok = grid[0] - lo_half <= f <= grid[-1] + hi_half
    if not ok:
        raise FrequencyOutOfRange(f"{f:.6g} Hz is outside the bend model grid")
    return k


def bend_excess_loss(model: BendModel, r: float, f: float) -> float:
    """Excess loss in dB of a bend with radius ``r`` at the grid point nearest ``f``."""
    if not r > 0:
        raise InputError("bend radius must be > 0")
    k = _nearest_index(model.grid, f)
    return float(model.a_db[k] * np.exp(-r / model.r0_m[k]))
