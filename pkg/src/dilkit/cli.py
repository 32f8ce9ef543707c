"""dilkit command line.

Every subcommand reads an optional ``key = value`` config file (``--config``);
individual flags override it. CSV output goes to ``-o FILE`` (written
atomically) or stdout. Exit codes: 0 ok, 2 input error, 3 computation error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from ._io import atomic_write_text
from .deembed import LineMeasurement, converter_loss, gamma_from_two_lines
from .discontinuity import bend_residuals, fit_bend_model, taper_sweep
from .errors import ComputationError, DilkitError, InputError
from .lossmodel import np_per_m_to_db_per_cm, total_alpha_profile
from .modesolver import ImageLineGeometry, image_line_mode
from .netcore import frequency_grid
from .synth import ConverterSpec, make_converter, measured_profile, synth_back_to_back
from .touchstone import TouchstoneOptions, read_s2p, write_s2p

SCHEMAS = {
    "dispersion": ["freq_hz", "n_eff", "beta_rad_per_m", "conf_total", "alpha_model_np_per_m",
                   "alpha_model_db_per_cm"],
    "extract": ["freq_hz", "alpha_np_per_m", "alpha_db_per_cm", "beta_rad_per_m", "converter_il_db"],
    "taper": ["taper_length_m", "freq_hz", "rl_db"],
    "bendfit": ["freq_hz", "a_db", "r0_m", "rms_residual_db", "max_abs_residual_db"],
}
BENDFIT_INPUT = ["freq_hz", "radius_m", "excess_loss_db"]


class ConfigError(InputError):
    pass


@dataclass
class RunConfig:
    # geometry
    width_a: float = 1.295e-3
    height_b: float = 1.295e-3 / 4
    eps_r: float = 2.2
    tan_delta: float = 1e-4
    conductor_sigma: float = 5.8e7
    roughness_rq: float = 0.5e-6
    eps_clad: float = 1.0
    # grid
    f_start: float = 140e9
    f_stop: float = 220e9
    f_step: float = 1e9
    # synth
    lengths: list = field(default_factory=lambda: [0.04, 0.06])
    alpha_profile: str = "model"
    converter_il_db: float = 0.3
    converter_rl_db: float = 20.0
    converter_phase_length_m: float = 0.01
    noise_db: float | None = None
    seed: int = 0
    # touchstone output
    format: str = "RI"
    freq_unit: str = "GHZ"
    z_ref: float = 50.0
    # taper
    taper_lengths: list = field(default_factory=lambda: [1e-3, 2e-3, 3e-3])
    taper_start_fraction: float = 0.05
    taper_sections: int = 64

    def geometry(self) -> ImageLineGeometry:
        return ImageLineGeometry(self.width_a, self.height_b, self.eps_r, self.tan_delta,
                                 self.conductor_sigma, self.roughness_rq, self.eps_clad)

    def grid(self):
        return frequency_grid(self.f_start, self.f_stop, self.f_step)

    def to_text(self) -> str:
        lines = []
        for fd in fields(self):
            v = getattr(self, fd.name)
            if isinstance(v, list):
                v = ",".join(repr(float(x)) for x in v)
            lines.append(f"{fd.name} = {'none' if v is None else v}")
        return "\n".join(lines) + "\n"


_FIELDS = {fd.name: fd for fd in fields(RunConfig)}
_LIST_KEYS = {"lengths", "taper_lengths"}
_INT_KEYS = {"seed", "taper_sections"}
_STR_KEYS = {"alpha_profile": ("model", "measured"), "format": ("RI", "MA", "DB"),
             "freq_unit": ("HZ", "KHZ", "MHZ", "GHZ")}


def _convert(key, raw: str):
    raw = raw.strip()
    try:
        if key in _LIST_KEYS:
            vals = [float(x) for x in raw.replace(";", ",").split(",") if x.strip()]
            if not vals:
                raise ValueError
            return vals
        if key in _INT_KEYS:
            return int(raw)
        if key in _STR_KEYS:
            v = raw.upper() if key != "alpha_profile" else raw.lower()
            if v not in _STR_KEYS[key]:
                raise ValueError
            return v
        if key == "noise_db" and raw.lower() in ("", "none"):
            return None
        return float(raw)
    except ValueError:
        raise ConfigError(f"invalid value {raw!r} for config key '{key}'") from None


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key '{key}'")
        out[key] = _convert(key, value)
    return out


def build_config(args) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
    for key in _FIELDS:
        raw = getattr(args, "cfg_" + key, None)
        if raw is not None:
            values[key] = _convert(key, raw)
    cfg = RunConfig(**values)
    # surface invalid combinations with the key that caused them
    for key in ("f_start", "f_stop", "f_step"):
        if not getattr(cfg, key) > 0:
            raise ConfigError(f"config key '{key}' must be > 0")
    if cfg.f_stop < cfg.f_start:
        raise ConfigError("config key 'f_stop' must be >= f_start")
    if cfg.taper_sections < 1:
        raise ConfigError("config key 'taper_sections' must be >= 1")
    return cfg


def thread_cap() -> int:
    raw = os.environ.get("DILKIT_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise ConfigError("DILKIT_THREADS must be a positive integer")
    return n


def _fmt(v) -> str:
    return repr(float(v))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out):
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_dispersion(args) -> int:
    cfg = build_config(args)
    geom, f = cfg.geometry(), cfg.grid()
    mode = image_line_mode(geom, f)
    prof = total_alpha_profile(geom, f)
    rows = zip(f, np.atleast_1d(mode.n_eff), prof.beta, np.atleast_1d(mode.conf_total),
               prof.alpha, np_per_m_to_db_per_cm(prof.alpha))
    _emit(_csv_text(SCHEMAS["dispersion"], rows), args.output)
    return 0


def _parse_length(raw: str) -> float:
    try:
        v = float(raw)
    except ValueError:
        raise InputError(f"invalid line length {raw!r}") from None
    if not v > 0:
        raise InputError(f"line length must be > 0, got {raw!r}")
    return v


def cmd_extract(args) -> int:
    cfg = build_config(args)
    n1, _ = read_s2p(args.file1)
    n2, _ = read_s2p(args.file2)
    m1 = LineMeasurement(n1, _parse_length(args.length1))
    m2 = LineMeasurement(n2, _parse_length(args.length2))
    geom = cfg.geometry()
    seed = image_line_mode(geom, n1.f).beta
    gamma = gamma_from_two_lines(m1, m2, beta_seed=seed)
    conv = 0.5 * (converter_loss(m1, gamma) + converter_loss(m2, gamma))
    rows = zip(gamma.grid, gamma.alpha, gamma.alpha_db_per_cm, gamma.beta, conv)
    _emit(_csv_text(SCHEMAS["extract"], rows), args.output)
    return 0


def synth_networks(cfg: RunConfig):
    """Back-to-back networks for every configured length, in order."""
    f = cfg.grid()
    if cfg.alpha_profile == "measured":
        gamma = measured_profile(f, cfg.geometry())
    else:
        gamma = total_alpha_profile(cfg.geometry(), f)
    conv = make_converter(ConverterSpec(cfg.converter_il_db, cfg.converter_rl_db, cfg.converter_phase_length_m), f)
    nets = []
    for i, length in enumerate(cfg.lengths):
        # independent noise per file, derived from the one seed
        nets.append(synth_back_to_back(gamma, length, conv, cfg.noise_db, seed=cfg.seed + i))
    return gamma, nets


def synth_filename(length_m: float) -> str:
    return f"dil_{length_m * 1e3:g}mm.s2p"


def cmd_synth(args) -> int:
    cfg = build_config(args)
    outdir = args.output or "."
    if not os.path.isdir(outdir):
        raise InputError(f"output directory {outdir!r} does not exist")
    opts = TouchstoneOptions(cfg.freq_unit, cfg.format, "S", cfg.z_ref)
    _, nets = synth_networks(cfg)
    for length, net in zip(cfg.lengths, nets):
        path = os.path.join(outdir, synth_filename(length))
        write_s2p(path, net, opts)
        print(path)
    return 0


def _taper_row(geom, cfg, f, length):
    return taper_sweep(geom, [length], f, cfg.taper_start_fraction, cfg.taper_sections)[0]


def cmd_taper(args) -> int:
    cfg = build_config(args)
    geom, f = cfg.geometry(), cfg.grid()
    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        rl = list(pool.map(lambda L: _taper_row(geom, cfg, f, L), cfg.taper_lengths))
    rows = [(length, fk, r) for length, row in zip(cfg.taper_lengths, rl) for fk, r in zip(f, row)]
    _emit(_csv_text(SCHEMAS["taper"], rows), args.output)
    return 0


def read_bend_csv(path):
    """Read a long-format bend table into (grid, samples)."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            names = reader.fieldnames or []
            raw = list(reader)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if any(c not in names for c in BENDFIT_INPUT):
        raise InputError(f"bend CSV needs columns {', '.join(BENDFIT_INPUT)}")
    try:
        recs = [(float(r["freq_hz"]), float(r["radius_m"]), float(r["excess_loss_db"])) for r in raw]
    except (ValueError, TypeError):
        raise InputError(f"non-numeric entry in {path}") from None
    if not recs:
        raise InputError(f"{path} has no data rows")
    freqs = sorted({r[0] for r in recs})
    radii = sorted({r[1] for r in recs})
    table = {(fr, r): el for fr, r, el in recs}
    samples = []
    for r in radii:
        try:
            samples.append((r, np.array([table[(fr, r)] for fr in freqs])))
        except KeyError:
            raise InputError(f"radius {r!r} is missing some frequencies") from None
    return np.array(freqs), samples


def cmd_bendfit(args) -> int:
    f, samples = read_bend_csv(args.input)
    model = fit_bend_model(samples, f)
    res = bend_residuals(model, samples)
    rms = np.sqrt(np.mean(res ** 2, axis=0))
    worst = np.max(np.abs(res), axis=0)
    rows = zip(model.grid, model.a_db, model.r0_m, rms, worst)
    _emit(_csv_text(SCHEMAS["bendfit"], rows), args.output)
    return 0


def cmd_convert(args) -> int:
    net, src = read_s2p(args.input)
    opts = TouchstoneOptions(args.freq_unit or src.freq_unit, args.format or src.format, "S", net.z_ref)
    write_s2p(args.output, net, opts)
    return 0


def _describe(name) -> str:
    if name in SCHEMAS:
        info = {"command": name, "output": "csv", "columns": SCHEMAS[name]}
        if name == "bendfit":
            info["input_columns"] = BENDFIT_INPUT
    elif name == "synth":
        info = {"command": name, "output": "touchstone-v1.1", "files": "dil_<length_mm>mm.s2p",
                "columns": ["freq", "s11", "s21", "s12", "s22"]}
    else:
        info = {"command": name, "output": "touchstone-v1.1", "columns": ["freq", "s11", "s21", "s12", "s22"]}
    return json.dumps(info, sort_keys=True) + "\n"


def _add_config_flags(p):
    p.add_argument("--config", help="key = value config file")
    for fd in fields(RunConfig):
        p.add_argument("--" + fd.name.replace("_", "-"), dest="cfg_" + fd.name, metavar="VALUE",
                       help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dilkit", description="Dielectric image line analysis toolkit")
    parser.add_argument("--version", action="version", version=f"dilkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dispersion", help="mode solver and loss model sweep")
    _add_config_flags(p)
    p.add_argument("-o", "--output")

    p = sub.add_parser("extract", help="gamma from two back-to-back .s2p files")
    p.add_argument("file1")
    p.add_argument("length1", help="line length in m")
    p.add_argument("file2")
    p.add_argument("length2", help="line length in m")
    _add_config_flags(p)
    p.add_argument("-o", "--output")

    p = sub.add_parser("synth", help="write synthetic back-to-back .s2p files")
    _add_config_flags(p)
    p.add_argument("-o", "--output", help="output directory")

    p = sub.add_parser("taper", help="taper return-loss sweep")
    _add_config_flags(p)
    p.add_argument("-o", "--output")

    p = sub.add_parser("bendfit", help="fit exponential bend excess loss")
    p.add_argument("input", help="CSV with columns " + ",".join(BENDFIT_INPUT))
    p.add_argument("-o", "--output")

    p = sub.add_parser("convert", help="transcode a Touchstone file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--format", type=str.upper, choices=("RI", "MA", "DB"))
    p.add_argument("--freq-unit", type=str.upper, choices=("HZ", "KHZ", "MHZ", "GHZ"))

    for name, sp in sub.choices.items():
        sp.add_argument("--describe", action="store_true", help="print the output schema as JSON and exit")
        sp.set_defaults(func=globals()["cmd_" + name])
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if "--describe" in argv and argv and argv[0] in SCHEMAS.keys() | {"synth", "convert"}:
        sys.stdout.write(_describe(argv[0]))
        return 0
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"dilkit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ComputationError as exc:
        print(f"dilkit {args.command}: computation failed: {exc}", file=sys.stderr)
        return 3
    except DilkitError as exc:
        print(f"dilkit {args.command}: error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
