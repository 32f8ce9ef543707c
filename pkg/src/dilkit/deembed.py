"""Propagation-coefficient extraction from back-to-back line measurements.

Two measurements of the same converter pair around lines of different length
give chain matrices ``T_i = T_A @ L(gamma, l_i) @ T_B``. Their quotient
``T_2 @ inv(T_1) = T_A @ L(gamma, l_2 - l_1) @ inv(T_A)`` is similar to the
bare line difference, so its eigenvalues are ``exp(-/+ gamma * dl)`` no matter
what the converters look like.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .constants import NP_TO_DB
from .errors import (
    DegenerateLengths,
    InputError,
    NonMonotoneResult,
    NonPassiveEigenvalue,
    SingularTMatrix,
)
from .lossmodel import PropagationProfile
from .modesolver import ImageLineGeometry, beta_profile
from .netcore import TwoPortNetwork, as_grid, check_same_grid, il_db, s_to_t

MIN_LENGTH_DIFF = 1e-6  # m
EIG_PASSIVITY_TOL = 0.05


@dataclass(frozen=True)
class LineMeasurement:
    network: TwoPortNetwork
    length_m: float

    def __post_init__(self):
        if not self.length_m > 0:
            raise InputError("line length must be > 0")


def eig2(m):
    """Closed-form eigenvalues of a stack of 2x2 matrices, shape (..., 2)."""
    m = np.asarray(m, dtype=complex)
    tr = m[..., 0, 0] + m[..., 1, 1]
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    disc = np.sqrt(tr * tr - 4 * det)
    # take the root that avoids cancellation, get the other from the product
    sgn = np.where(np.real(np.conj(tr) * disc) >= 0, 1.0, -1.0)
    big = 0.5 * (tr + sgn * disc)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, det / big, 0.0)
    return np.stack([big, small], axis=-1)


def _inv2(t, f):
    det = t[..., 0, 0] * t[..., 1, 1] - t[..., 0, 1] * t[..., 1, 0]
    bad = np.abs(det) <= 1e-12 * np.max(np.abs(t), axis=(-2, -1)) ** 2
    if np.any(bad):
        raise SingularTMatrix(f"singular T matrix at {f[np.argmax(bad)]:.6g} Hz")
    inv = np.empty_like(t)
    inv[..., 0, 0] = t[..., 1, 1]
    inv[..., 1, 1] = t[..., 0, 0]
    inv[..., 0, 1] = -t[..., 0, 1]
    inv[..., 1, 0] = -t[..., 1, 0]
    return inv / det[..., None, None]


def line_eigenvalues(m1: LineMeasurement, m2: LineMeasurement):
    """Eigenvalues of ``T_long @ inv(T_short)`` and the length difference.

    Returns ``(lam, dl)`` with ``lam`` of shape ``(N, 2)`` sorted by magnitude:
    the first column is the smaller-magnitude (decaying) eigenvalue.
    """
    check_same_grid(m1.network.f, m2.network.f)
    if abs(m2.length_m - m1.length_m) <= MIN_LENGTH_DIFF:
        raise DegenerateLengths("degenerate lengths: line lengths must differ by more than 1 um")
    if m2.length_m < m1.length_m:
        m1, m2 = m2, m1
    f = m1.network.f
    try:
        t1 = s_to_t(m1.network.s)
        t2 = s_to_t(m2.network.s)
    except ArithmeticError as exc:
        raise SingularTMatrix(str(exc)) from exc
    m = t2 @ _inv2(t1, f)
    lam = eig2(m)
    order = np.argsort(np.abs(lam), axis=-1)
    lam = np.take_along_axis(lam, order, axis=-1)
    return lam, m2.length_m - m1.length_m


def _wrap(x):
    return np.angle(np.exp(1j * x))


def select_decaying(lam, delta_l: float, seed_beta) -> np.ndarray:
    """Pick the decaying eigenvalue ``exp(-gamma * dl)`` at each frequency.

    On near-lossless or noisy data the two magnitudes can swap order, so the
    choice is made by phase instead: the decaying eigenvalue's phase advances
    by ``-dl * d(beta)`` between grid points, the growing one's by the same
    amount in the opposite direction, with ``d(beta)`` taken from
    ``seed_beta``. Both starting choices are tracked along the grid and the
    track with the smaller total prediction error wins. Ties in phase, and
    single-point grids, fall back to the smaller magnitude.
    """
    lam = np.asarray(lam)
    n = lam.shape[0]
    if n == 1:
        return lam[:, 0]
    ang = np.angle(lam)
    step = -np.diff(np.asarray(seed_beta, dtype=float)) * delta_l

    best = None
    for start in (0, 1):
        pick = np.empty(n, dtype=int)
        pick[0] = start
        cost = 0.0
        for k in range(1, n):
            d = np.abs(_wrap(ang[k] - ang[k - 1, pick[k - 1]] - step[k - 1]))
            pick[k] = 0 if abs(d[0] - d[1]) < 0.1 else int(np.argmin(d))
            cost += d[pick[k]]
        if best is None or cost < best[0]:
            best = (cost, pick)
    return lam[np.arange(n), best[1]]


def unwrap_beta(raw_phase_per_m, delta_l: float, grid, beta_seed=None) -> np.ndarray:
    """Resolve the 2*pi/dl ambiguity of the eigenvalue phase.

    The lowest frequency is placed on the branch closest to ``beta_seed``
    (defaults to the mode-solver result for the default geometry); each
    following point takes the branch closest to its predecessor.
    """
    f = as_grid(grid)
    raw = np.asarray(raw_phase_per_m, dtype=float)
    if raw.shape != f.shape:
        raise InputError("phase array does not match grid")
    if beta_seed is None:
        beta_seed = beta_profile(ImageLineGeometry(), f)
    seed0 = np.atleast_1d(np.asarray(beta_seed, dtype=float))[0]
    period = 2 * np.pi / delta_l

    beta = np.empty_like(raw)
    beta[0] = raw[0] + period * np.round((seed0 - raw[0]) / period)
    for k in range(1, raw.size):
        beta[k] = raw[k] + period * np.round((beta[k - 1] - raw[k]) / period)

    step = np.diff(beta)
    if np.any(step <= 0):
        k = int(np.argmax(step <= 0))
        seed = np.atleast_1d(np.asarray(beta_seed, dtype=float))
        if seed.size == f.size and f.size > 1:
            slope = (seed[-1] - seed[0]) / (f[-1] - f[0])
        else:
            slope = 2 * np.pi * 1.5 / 299792458.0  # generous group index
        need = np.pi / (delta_l * slope) if slope > 0 else float("nan")
        raise NonMonotoneResult(
            f"beta not increasing at {f[k + 1]:.6g} Hz; grid spacing must stay below "
            f"{need:.4g} Hz for a length difference of {delta_l:g} m"
        )
    return beta


def gamma_from_two_lines(m1: LineMeasurement, m2: LineMeasurement, beta_seed=None,
                         passivity_tol: float = EIG_PASSIVITY_TOL) -> PropagationProfile:
    """Extract gamma = alpha + j beta from two back-to-back measurements.

    Parameters
    ----------
    m1, m2 : LineMeasurement
        Same converters, same grid, different line lengths.
    beta_seed : array_like, optional
        Rough beta (rad/m) used to pick the absolute phase branch at the lowest
        frequency. Defaults to the mode solver on the default geometry.
    passivity_tol : float
        Decaying eigenvalues with ``1 < |lam| <= 1 + passivity_tol`` are
        attributed to noise and give alpha = 0; larger ones raise
        :class:`NonPassiveEigenvalue`.
    """
    lam, dl = line_eigenvalues(m1, m2)
    f = m1.network.f
    if beta_seed is None:
        beta_seed = beta_profile(ImageLineGeometry(), f)
    seed = np.broadcast_to(np.asarray(beta_seed, dtype=float), f.shape)
    lam_dec = select_decaying(lam, dl, seed)
    mag = np.abs(lam_dec)
    bad = mag > 1.0 + passivity_tol
    if np.any(bad):
        raise NonPassiveEigenvalue(
            f"both eigenvalues exceed unit magnitude at {f[np.argmax(bad)]:.6g} Hz "
            "(data inconsistent with a passive line)"
        )
    alpha = np.maximum(-np.log(mag) / dl, 0.0)
    raw = -np.angle(lam_dec) / dl
    beta = unwrap_beta(raw, dl, f, seed)
    return PropagationProfile(f, alpha, beta)


def alpha_from_il_slope(measurements):
    """Least-squares slope of insertion loss (Np) versus length.

    Returns ``(alpha, intercept)`` per frequency: alpha in Np/m, intercept in
    Np (both converters plus mismatch).
    """
    measurements = list(measurements)
    if len(measurements) < 2:
        raise InputError("need at least two line measurements")
    for m in measurements[1:]:
        check_same_grid(measurements[0].network.f, m.network.f)
    lengths = np.array([m.length_m for m in measurements])
    if np.ptp(lengths) <= MIN_LENGTH_DIFF:
        raise DegenerateLengths("degenerate lengths: all line lengths are equal")
    il_np = np.array([-np.log(np.abs(m.network.s21)) for m in measurements])  # (n_lines, N)
    x = lengths - lengths.mean()
    y = il_np - il_np.mean(axis=0)
    alpha = x @ y / (x @ x)
    intercept = il_np.mean(axis=0) - alpha * lengths.mean()
    return alpha, intercept


def converter_loss(back_to_back: LineMeasurement, gamma: PropagationProfile) -> np.ndarray:
    """Loss of one converter in dB: (IL_measured - alpha * L) / 2."""
    check_same_grid(back_to_back.network.f, gamma.grid)
    loss = 0.5 * (il_db(back_to_back.network) - gamma.alpha * NP_TO_DB * back_to_back.length_m)
    low = loss < -0.05
    if np.any(low):
        warnings.warn(
            f"converter loss below -0.05 dB at {int(low.sum())} frequencies "
            f"(first at {gamma.grid[np.argmax(low)]:.6g} Hz)",
            stacklevel=2,
        )
    return loss
