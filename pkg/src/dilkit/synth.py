"""Synthetic back-to-back measurements with known ground truth."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import C0, WR05_A
from .errors import InputError, NonPassiveSpec
from .lossmodel import PropagationProfile, db_per_cm_to_np_per_m
from .modesolver import ImageLineGeometry, beta_profile
from .netcore import TwoPortNetwork, as_grid, cascade, check_same_grid, line_network

# mean and 220 GHz attenuation of the printed COC lines, dB/cm
MEASURED_ALPHA_MEAN_DB_CM = 0.25
MEASURED_ALPHA_220_DB_CM = 0.35


@dataclass(frozen=True)
class ConverterSpec:
    """Insertion loss (dB, scalar or per frequency), return loss (dB) and the
    equivalent electrical length (m) that sets the converter phases."""

    il_db: float | np.ndarray = 0.3
    rl_db: float = 20.0
    phase_length_m: float = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.il_db) < 0):
            raise InputError("converter il_db must be >= 0")
        if not self.rl_db > 0:
            raise InputError("converter rl_db must be > 0")
        if self.phase_length_m < 0:
            raise InputError("phase_length_m must be >= 0")


def wr05_beta(f, a=WR05_A):
    """TE10 phase constant of the feeding rectangular waveguide, rad/m."""
    f = np.asarray(f, dtype=float)
    kc = np.pi / a
    k0 = 2 * np.pi * f / C0
    if np.any(k0 <= kc):
        raise InputError("frequency below the WR05 TE10 cutoff")
    return np.sqrt(k0 * k0 - kc * kc)


def make_converter(spec: ConverterSpec, grid) -> TwoPortNetwork:
    """Reciprocal converter model.

    ``s21 = s12 = t e^{-j theta}``, ``s11 = r e^{-2j theta}``, ``s22 = -r`` with
    ``theta = beta_wg * phase_length``. These phases make S^H S = (r^2 + t^2) I,
    so the network is passive exactly when ``r^2 + t^2 <= 1``.
    """
    f = as_grid(grid)
    t = np.broadcast_to(10.0 ** (-np.asarray(spec.il_db, dtype=float) / 20.0), f.shape)
    r = 10.0 ** (-spec.rl_db / 20.0)  # rl_db = inf -> 0
    worst = np.max(r * r + t * t)
    if worst > 1.0 + 1e-12:
        raise NonPassiveSpec(
            f"il={spec.il_db} dB with rl={spec.rl_db} dB is not passive (|s11|^2+|s21|^2 = {worst:.6f})"
        )
    theta = wr05_beta(f) * spec.phase_length_m if spec.phase_length_m else np.zeros_like(f)
    return TwoPortNetwork.from_parameters(
        f,
        s11=r * np.exp(-2j * theta),
        s21=t * np.exp(-1j * theta),
        s12=t * np.exp(-1j * theta),
        s22=-r * np.ones_like(f),
        name="converter",
    )


def synth_back_to_back(gamma: PropagationProfile, length_m: float, converter: TwoPortNetwork,
                       noise_db: float | None = None, seed: int = 0) -> TwoPortNetwork:
    """converter -> line -> port-swapped converter, optionally with noise.

    ``noise_db`` sets the rms of independent complex Gaussian perturbations
    added to every S entry, ``10**(noise_db/20)``.
    """
    if not length_m > 0:
        raise InputError("length_m must be > 0")
    check_same_grid(gamma.grid, converter.f)
    net = cascade(converter, line_network(gamma, length_m, z_ref=converter.z_ref), converter.flipped())
    if noise_db is None:
        return net
    rng = np.random.default_rng(seed)
    sigma = 10.0 ** (noise_db / 20.0)
    shape = net.s.shape
    noise = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * (sigma / np.sqrt(2))
    return TwoPortNetwork(net.f, net.s + noise, net.z_ref)


def measured_alpha_db_per_cm(grid, mean=MEASURED_ALPHA_MEAN_DB_CM, top=MEASURED_ALPHA_220_DB_CM):
    """Attenuation rising linearly in f, with the given band mean and
    value at the top of the grid (dB/cm)."""
    f = as_grid(grid)
    if f.size == 1:
        return np.array([top])
    x = (f - f[0]) / (f[-1] - f[0])
    slope = (top - mean) / (1.0 - x.mean())
    return top + slope * (x - 1.0)


def measured_profile(grid, geom: ImageLineGeometry | None = None) -> PropagationProfile:
    """Reference gamma: measured-like alpha with beta from the mode solver."""
    f = as_grid(grid)
    geom = geom or ImageLineGeometry()
    return PropagationProfile(f, db_per_cm_to_np_per_m(measured_alpha_db_per_cm(f)), beta_profile(geom, f))


def synth_bend_excess_loss(grid, radii_m, a_db, r0_m) -> list[tuple[float, np.ndarray]]:
    """Exact exponential bend excess loss ``a e^{-r/r0}`` per radius.

    ``a_db`` and ``r0_m`` are scalars or per-frequency arrays. Returns samples
    in the form accepted by :func:`dilkit.discontinuity.fit_bend_model`.
    """
    f = as_grid(grid)
    a = np.broadcast_to(np.asarray(a_db, dtype=float), f.shape)
    r0 = np.broadcast_to(np.asarray(r0_m, dtype=float), f.shape)
    return [(float(r), a * np.exp(-r / r0)) for r in radii_m]
