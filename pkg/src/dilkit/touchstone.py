"""Touchstone v1.1 reader and writer for two-port (.s2p) data.

Data rows carry the frequency followed by four value pairs in the order
S11 S21 S12 S22 (the two-port exception to row-major ordering).
"""
from __future__ import annotations

import io
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    MalformedOptionLine,
    NonMonotoneFrequency,
    TouchstoneError,
    UnsupportedParameter,
    UnsupportedVersion,
    WrongColumnCount,
)
from .netcore import TwoPortNetwork

FREQ_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
FORMATS = ("RI", "MA", "DB")
_OTHER_PARAMETERS = ("Y", "Z", "G", "H")

# file column order -> (row, col) in the 2x2 matrix
_COLUMN_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class TouchstoneOptions:
    freq_unit: str = "GHZ"
    format: str = "MA"
    parameter: str = "S"
    z_ref: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, "freq_unit", self.freq_unit.upper())
        object.__setattr__(self, "format", self.format.upper())
        object.__setattr__(self, "parameter", self.parameter.upper())
        if self.freq_unit not in FREQ_UNITS:
            raise MalformedOptionLine(f"unknown frequency unit {self.freq_unit!r}")
        if self.format not in FORMATS:
            raise MalformedOptionLine(f"unknown data format {self.format!r}")
        if self.parameter != "S":
            raise UnsupportedParameter(f"only S-parameters are supported, got {self.parameter!r}")
        if not self.z_ref > 0:
            raise MalformedOptionLine("reference impedance must be > 0")

    def option_line(self) -> str:
        return f"# {self.freq_unit} {self.parameter} {self.format} R {self.z_ref:.17g}"


def parse_option_line(line: str) -> TouchstoneOptions:
    """Parse a ``#`` option line; omitted tokens keep their v1 defaults."""
    body = line.split("!", 1)[0].strip()
    if not body.startswith("#"):
        raise MalformedOptionLine(f"not an option line: {line!r}")
    unit, fmt, param, z_ref = "GHZ", "MA", "S", 50.0
    it = iter(body[1:].split())
    for tok in it:
        t = tok.upper()
        if t in FREQ_UNITS:
            unit = t
        elif t in FORMATS:
            fmt = t
        elif t == "S":
            param = t
        elif t in _OTHER_PARAMETERS:
            raise UnsupportedParameter(f"{t}-parameters are not supported")
        elif t == "R":
            value = next(it, None)
            if value is None:
                raise MalformedOptionLine("'R' must be followed by the reference impedance")
            try:
                z_ref = float(value)
            except ValueError:
                raise MalformedOptionLine(f"bad reference impedance {value!r}") from None
        else:
            raise MalformedOptionLine(f"unexpected token {tok!r} in option line")
    return TouchstoneOptions(unit, fmt, param, z_ref)


def _to_complex(a, b, fmt):
    if fmt == "RI":
        return a + 1j * b
    mag = a if fmt == "MA" else 10.0 ** (a / 20.0)
    return mag * np.exp(1j * np.deg2rad(b))


def _from_complex(z, fmt):
    if fmt == "RI":
        return z.real, z.imag
    ang = np.rad2deg(np.angle(z))
    if fmt == "MA":
        return np.abs(z), ang
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.abs(z)), ang


def parse_touchstone(text) -> tuple[TwoPortNetwork, TouchstoneOptions]:
    """Parse two-port Touchstone v1.1 content.

    ``text`` may be a string or a text stream. Returns the network (frequency
    in Hz) and the options found in the file.
    """
    if not isinstance(text, str):
        text = text.read()
    options = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise UnsupportedVersion(
                f"line {lineno}: Touchstone v2 keyword {line.split()[0]!r}; only v1.1 is supported")
        if line.startswith("#"):
            if options is None:
                options = parse_option_line(line)
            continue  # v1.1: option lines after the first are ignored
        fields = line.split()
        try:
            values = [float(x) for x in fields]
        except ValueError:
            raise TouchstoneError(f"line {lineno}: non-numeric data {line!r}") from None
        if rows and len(values) == 5 and values[0] <= rows[-1][0]:
            warnings.warn(f"line {lineno}: noise parameter section ignored", stacklevel=2)
            break
        if len(values) != 9:
            raise WrongColumnCount(f"line {lineno}: expected 9 fields, got {len(values)}")
        if rows and values[0] <= rows[-1][0]:
            raise NonMonotoneFrequency(f"line {lineno}: frequency {values[0]!r} not increasing")
        rows.append(values)
    if options is None:
        options = TouchstoneOptions()
    if not rows:
        raise TouchstoneError("no data rows found")

    data = np.array(rows)
    f = data[:, 0] * FREQ_UNITS[options.freq_unit]
    s = np.empty((len(rows), 2, 2), dtype=complex)
    for k, (i, j) in enumerate(_COLUMN_ORDER):
        s[:, i, j] = _to_complex(data[:, 1 + 2 * k], data[:, 2 + 2 * k], options.format)
    return TwoPortNetwork(f, s, options.z_ref), options


def write_touchstone(n: TwoPortNetwork, opts: TouchstoneOptions | None = None) -> str:
    """Serialize ``n`` as Touchstone v1.1 text with round-trip-safe numbers."""
    if opts is None:
        opts = TouchstoneOptions(z_ref=n.z_ref)
    cols = [n.f / FREQ_UNITS[opts.freq_unit]]
    for i, j in _COLUMN_ORDER:
        cols.extend(_from_complex(n.s[:, i, j], opts.format))
    out = io.StringIO()
    out.write(opts.option_line() + "\n")
    out.write("! generated by dilkit\n")
    for row in np.column_stack(cols):
        out.write(" ".join(f"{v:.17g}" for v in row) + "\n")
    return out.getvalue()


def read_s2p(path) -> tuple[TwoPortNetwork, TouchstoneOptions]:
    with open(path, encoding="ascii", newline="") as fh:
        net, opts = parse_touchstone(fh.read())
    return TwoPortNetwork(net.f, net.s, net.z_ref, os.path.basename(str(path))), opts


def write_s2p(path, n: TwoPortNetwork, opts: TouchstoneOptions | None = None) -> None:
    from ._io import atomic_write_text

    atomic_write_text(path, write_touchstone(n, opts))
