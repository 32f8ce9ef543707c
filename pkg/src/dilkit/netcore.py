"""Two-port network algebra.

S-parameters are stored as ``(N, 2, 2)`` complex arrays indexed ``[k, i, j]``
so ``s[:, 1, 0]`` is S21. The chain (T) matrix convention used everywhere in
dilkit relates the port waves as ``[b1, a1]^T = T @ [a2, b2]^T``::

    T = 1/s21 * [[s12*s21 - s11*s22, s11],
                 [-s22,              1  ]]

With this convention a cascade "a then b" is the plain matrix product
``T_a @ T_b`` and a matched line of length L has ``T = diag(e^-gL, e^+gL)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, InputError, SingularConversion

SINGULAR_TOL = 1e-12
PASSIVITY_TOL = 1e-6


def as_grid(points) -> np.ndarray:
    """Validate and return a frequency grid as a read-only float array (Hz)."""
    f = np.array(points, dtype=float, ndmin=1)
    if f.ndim != 1 or f.size == 0:
        raise InputError("frequency grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(f)) or np.any(f <= 0):
        raise InputError("frequency grid points must be finite and > 0")
    if np.any(np.diff(f) <= 0):
        raise InputError("frequency grid must be strictly ascending")
    f.flags.writeable = False
    return f


def frequency_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive uniform grid ``start, start+step, ..., stop``."""
    if step <= 0 or stop < start:
        raise InputError("need step > 0 and stop >= start")
    n = int(round((stop - start) / step)) + 1
    return as_grid(start + step * np.arange(n))


def check_same_grid(*grids) -> None:
    """Raise GridMismatch unless all grids are bitwise identical."""
    first = np.asarray(grids[0])
    for g in grids[1:]:
        g = np.asarray(g)
        if g.shape != first.shape or not np.array_equal(g, first):
            raise GridMismatch("frequency grids differ")


@dataclass(frozen=True, eq=False)
class TwoPortNetwork:
    """Frequency-sampled 2x2 scattering data.

    Parameters
    ----------
    f : array_like
        Frequency grid in Hz, strictly ascending.
    s : array_like
        Complex S-parameters, shape ``(len(f), 2, 2)``.
    z_ref : float
        Reference impedance in ohm.
    """

    f: np.ndarray
    s: np.ndarray
    z_ref: float = 50.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        f = as_grid(self.f)
        s = np.array(self.s, dtype=complex)
        if s.shape != (f.size, 2, 2):
            raise InputError(f"S data has shape {s.shape}, expected {(f.size, 2, 2)}")
        if not np.all(np.isfinite(s)):
            raise InputError("S data contains non-finite entries")
        if not self.z_ref > 0:
            raise InputError("z_ref must be > 0")
        s.flags.writeable = False
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "z_ref", float(self.z_ref))

    def __len__(self):
        return self.f.size

    @property
    def s11(self):
        return self.s[:, 0, 0]

    @property
    def s12(self):
        return self.s[:, 0, 1]

    @property
    def s21(self):
        return self.s[:, 1, 0]

    @property
    def s22(self):
        return self.s[:, 1, 1]

    @classmethod
    def from_parameters(cls, f, s11, s21, s12, s22, z_ref=50.0, name=""):
        f = np.asarray(f, dtype=float)
        s = np.empty((f.size, 2, 2), dtype=complex)
        s[:, 0, 0] = s11
        s[:, 1, 0] = s21
        s[:, 0, 1] = s12
        s[:, 1, 1] = s22
        return cls(f, s, z_ref, name)

    def flipped(self) -> "TwoPortNetwork":
        """Port-swapped copy (port 1 <-> port 2)."""
        return TwoPortNetwork(self.f, self.s[:, ::-1, ::-1], self.z_ref, self.name)

    def max_singular_value(self) -> np.ndarray:
        return np.linalg.svd(self.s, compute_uv=False)[:, 0]

    def is_passive(self, tol: float = PASSIVITY_TOL) -> bool:
        return bool(np.all(self.max_singular_value() <= 1.0 + tol))

    def is_reciprocal(self, tol: float = 1e-10) -> bool:
        return bool(np.allclose(self.s12, self.s21, rtol=tol, atol=tol))


def s_to_t(s) -> np.ndarray:
    """Convert S-parameters (``(..., 2, 2)``) to chain T-parameters."""
    s = np.asarray(s, dtype=complex)
    s11, s12, s21, s22 = s[..., 0, 0], s[..., 0, 1], s[..., 1, 0], s[..., 1, 1]
    if np.any(np.abs(s21) <= SINGULAR_TOL):
        raise SingularConversion("|s21| <= 1e-12: network has no through path")
    t = np.empty_like(s)
    t[..., 0, 0] = (s12 * s21 - s11 * s22) / s21
    t[..., 0, 1] = s11 / s21
    t[..., 1, 0] = -s22 / s21
    t[..., 1, 1] = 1.0 / s21
    return t


def t_to_s(t) -> np.ndarray:
    """Inverse of :func:`s_to_t`."""
    t = np.asarray(t, dtype=complex)
    t11, t12, t21, t22 = t[..., 0, 0], t[..., 0, 1], t[..., 1, 0], t[..., 1, 1]
    if np.any(np.abs(t22) <= SINGULAR_TOL):
        raise SingularConversion("|t22| <= 1e-12: T matrix has no S equivalent")
    s = np.empty_like(t)
    s[..., 0, 0] = t12 / t22
    s[..., 0, 1] = (t11 * t22 - t12 * t21) / t22
    s[..., 1, 0] = 1.0 / t22
    s[..., 1, 1] = -t21 / t22
    return s


def cascade(a: TwoPortNetwork, b: TwoPortNetwork, *more: TwoPortNetwork) -> TwoPortNetwork:
    """Connect port 2 of ``a`` to port 1 of ``b`` (and so on for ``more``)."""
    nets = (a, b) + more
    for n in nets[1:]:
        check_same_grid(a.f, n.f)
        if n.z_ref != a.z_ref:
            raise GridMismatch("reference impedances differ")
    t = s_to_t(a.s)
    for n in nets[1:]:
        t = t @ s_to_t(n.s)
    return TwoPortNetwork(a.f, t_to_s(t), a.z_ref)


def through(f, z_ref: float = 50.0) -> TwoPortNetwork:
    f = as_grid(f)
    s = np.zeros((f.size, 2, 2), dtype=complex)
    s[:, 0, 1] = s[:, 1, 0] = 1.0
    return TwoPortNetwork(f, s, z_ref)


def line_network(gamma, length_m: float, grid=None, z_ref: float = 50.0) -> TwoPortNetwork:
    """Matched line ``s21 = s12 = exp(-(alpha + j beta) L)``.

    ``gamma`` is any object with ``grid``, ``alpha`` and ``beta`` arrays
    (a :class:`dilkit.lossmodel.PropagationProfile`). When ``grid`` is given
    it must equal ``gamma.grid`` exactly.
    """
    if length_m < 0:
        raise InputError("line length must be >= 0")
    f = gamma.grid if grid is None else grid
    check_same_grid(gamma.grid, f)
    g = np.asarray(gamma.alpha) + 1j * np.asarray(gamma.beta)
    e = np.exp(-g * length_m)
    s = np.zeros((len(f), 2, 2), dtype=complex)
    s[:, 0, 1] = s[:, 1, 0] = e
    return TwoPortNetwork(f, s, z_ref)


def il_db(n: TwoPortNetwork) -> np.ndarray:
    """Insertion loss -20 log10|s21| in dB."""
    with np.errstate(divide="ignore"):
        return -20.0 * np.log10(np.abs(n.s21))


def rl_db(n: TwoPortNetwork) -> np.ndarray:
    """Return loss -20 log10|s11| in dB; +inf where s11 == 0."""
    with np.errstate(divide="ignore"):
        return -20.0 * np.log10(np.abs(n.s11))


def db(x) -> np.ndarray:
    return 20.0 * np.log10(np.abs(x))
