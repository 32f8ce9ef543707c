"""Acceptance criteria, each checked at its stated tolerance.

A one-line PASS/FAIL per criterion is printed in the terminal summary.
"""
import csv
import dataclasses
import io
import math

import numpy as np
import pytest

from dilkit.cli import main
from dilkit.deembed import LineMeasurement, converter_loss, gamma_from_two_lines
from dilkit.discontinuity import TaperSpec, bend_excess_loss, fit_bend_model, taper_reflection, taper_sweep
from dilkit.errors import MalformedOptionLine, WrongColumnCount
from dilkit.lossmodel import conductor_alpha, dielectric_alpha, total_alpha_profile
from dilkit.modesolver import ImageLineGeometry, beta_profile, image_line_mode
from dilkit.netcore import TwoPortNetwork, cascade, frequency_grid, il_db, s_to_t, t_to_s
from dilkit.synth import ConverterSpec, make_converter, measured_profile, synth_back_to_back, synth_bend_excess_loss
from dilkit.touchstone import TouchstoneOptions, parse_touchstone, write_touchstone
from oracles import image_line_oracle, random_passive_s

acc = pytest.mark.acceptance
BAND = frequency_grid(140e9, 220e9, 1e9)
CHECKPOINTS = frequency_grid(140e9, 220e9, 10e9)
GEOM = ImageLineGeometry()
K200 = int(np.argmin(np.abs(BAND - 200e9)))


def _converter():
    return make_converter(ConverterSpec(0.3, 20.0, 0.01), BAND)


def _pair(gamma, noise_db=None):
    conv = _converter()
    return [LineMeasurement(synth_back_to_back(gamma, L, conv, noise_db, seed=i), L)
            for i, L in enumerate((0.04, 0.06))]


# 1

@acc(1, "round-trip extraction (noiseless 0.1%, -40 dB noise alpha rms < 5%)")
def test_ac1_noiseless_round_trip():
    gamma = total_alpha_profile(GEOM, BAND)
    g = gamma_from_two_lines(*_pair(gamma))
    ea = np.max(np.abs(g.alpha / gamma.alpha - 1))
    eb = np.max(np.abs(g.beta / gamma.beta - 1))
    print(f"max rel error alpha {ea:.3e}, beta {eb:.3e}")
    assert g.alpha.size == 81
    assert ea < 1e-3 and eb < 1e-3


@acc(1, "round-trip extraction (noiseless 0.1%, -40 dB noise alpha rms < 5%)")
def test_ac1_noisy_round_trip():
    gamma = total_alpha_profile(GEOM, BAND)
    g = gamma_from_two_lines(*_pair(gamma, noise_db=-40))
    rms = np.sqrt(np.mean((g.alpha / gamma.alpha - 1) ** 2))
    print(f"alpha rms relative error with -40 dB noise: {rms:.4f}")
    assert rms < 0.05


# 2

def _csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)


@acc(2, "measured-profile reproduction (mean 0.25 dB/cm, 0.35 dB/cm at 220 GHz, 1%)")
def test_ac2_measured_profile(tmp_path, capsys):
    assert main(["synth", "-o", str(tmp_path), "--alpha-profile", "measured"]) == 0
    capsys.readouterr()
    assert main(["extract", str(tmp_path / "dil_40mm.s2p"), "0.04", str(tmp_path / "dil_60mm.s2p"), "0.06"]) == 0
    header, data = _csv(capsys.readouterr().out)
    a = data[:, header.index("alpha_db_per_cm")]
    print(f"extracted mean {a.mean():.5f} dB/cm, at 220 GHz {a[-1]:.5f} dB/cm")
    assert abs(a.mean() / 0.25 - 1) < 0.01
    assert abs(a[-1] / 0.35 - 1) < 0.01


# 3

@acc(3, "single-line coherence (60 mm: IL <= 2.1 dB at 200 GHz, 2.8 +/- 0.3 dB at 220 GHz)")
def test_ac3_single_line():
    net = synth_back_to_back(measured_profile(BAND), 0.06, _converter())
    il = il_db(net)
    print(f"IL(200 GHz) = {il[K200]:.4f} dB, IL(220 GHz) = {il[-1]:.4f} dB")
    assert abs(il[-1] - 2.8) <= 0.3
    assert il[K200] <= 2.1


# 4

@acc(4, "converter loss 0.30 +/- 0.01 dB at 200 GHz")
def test_ac4_converter_loss():
    m40, m60 = _pair(measured_profile(BAND))
    gamma = gamma_from_two_lines(m40, m60)
    loss = converter_loss(m60, gamma)
    print(f"converter loss at 200 GHz (60 mm measurement): {loss[K200]:.4f} dB")
    assert abs(loss[K200] - 0.30) <= 0.01


# 5

@acc(5, "mode solver (bound, oracle 1e-6, beta linear < 2%, n_eff increasing)")
def test_ac5_mode_solver():
    m = image_line_mode(GEOM, BAND)
    assert np.all((m.n_eff > 1.0) & (m.n_eff < math.sqrt(2.2)))
    assert np.all(np.diff(m.n_eff) > 0)
    worst = 0.0
    for f in (140e9, 160e9, 180e9, 200e9, 220e9):
        nx, ny, _, _ = image_line_oracle(GEOM.width_a, GEOM.height_b, GEOM.eps_r, f)
        mf = image_line_mode(GEOM, f)
        worst = max(worst, abs(mf.n_eff - nx), abs(mf.n_eff_y - ny))
    beta = beta_profile(GEOM, BAND)
    resid = np.max(np.abs(beta - np.polyval(np.polyfit(BAND, beta, 1), BAND)) / beta)
    print(f"oracle deviation {worst:.2e}, beta linear-fit residual {resid:.4%}")
    assert worst < 1e-6
    assert resid < 0.02


# 6

@acc(6, "loss model (rising, alpha_d ~ tan_delta, alpha_c ~ sqrt f, 200 GHz in [0.03, 0.5] dB/cm)")
def test_ac6_loss_model():
    prof = total_alpha_profile(GEOM, BAND)
    assert np.all(np.diff(prof.alpha) > 0)
    m = image_line_mode(GEOM, 180e9)
    for k in (0.1, 3.0, 250.0):
        ratio = dielectric_alpha(dataclasses.replace(GEOM, tan_delta=k * GEOM.tan_delta), m) / dielectric_alpha(GEOM, m)
        assert ratio == pytest.approx(k, rel=1e-13)
    smooth = dataclasses.replace(GEOM, roughness_rq=0.0)
    a1 = conductor_alpha(smooth, dataclasses.replace(m, f=150e9))
    a2 = conductor_alpha(smooth, dataclasses.replace(m, f=600e9))
    assert a2 / a1 == pytest.approx(2.0, rel=1e-13)
    v = prof.alpha_db_per_cm[K200]
    print(f"model alpha at 200 GHz: {v:.4f} dB/cm")
    assert 0.03 <= v <= 0.5


# 7

@acc(7, "taper trend (RL 3 >= 2 >= 1 mm at 10 GHz checkpoints, 64 vs 256 sections < 1%)")
def test_ac7_taper_ordering():
    rl = taper_sweep(GEOM, [1e-3, 2e-3, 3e-3], CHECKPOINTS)
    print("RL 1/2/3 mm min over checkpoints:", np.round(rl.min(axis=1), 2))
    assert np.all(rl[2] >= rl[1]) and np.all(rl[1] >= rl[0])


@acc(7, "taper trend (RL 3 >= 2 >= 1 mm at 10 GHz checkpoints, 64 vs 256 sections < 1%)")
def test_ac7_taper_convergence():
    worst = {}
    for length in (1e-3, 2e-3, 3e-3):
        g64 = np.abs(taper_reflection(GEOM, TaperSpec(length, sections=64), CHECKPOINTS))
        g256 = np.abs(taper_reflection(GEOM, TaperSpec(length, sections=256), CHECKPOINTS))
        worst[length] = np.max(np.abs(g64 / g256 - 1))
    print("64 vs 256 sections, max relative |Gamma| change:",
          {f"{k * 1e3:g} mm": f"{v:.3%}" for k, v in worst.items()})
    assert max(worst.values()) < 0.01


# 8

@acc(8, "bend model (exact fit 1e-9, EL(3) > EL(10) > EL(20) > EL(30 mm), EL(inf) = 0)")
def test_ac8_bend_model():
    radii = [3e-3, 10e-3, 20e-3, 30e-3]
    m = fit_bend_model(synth_bend_excess_loss(BAND, radii, 5.0, 0.01), BAND)
    assert np.max(np.abs(m.a_db / 5.0 - 1)) < 1e-9
    assert np.max(np.abs(m.r0_m / 0.01 - 1)) < 1e-9
    for f in BAND:
        el = [bend_excess_loss(m, r, f) for r in radii]
        assert el[0] > el[1] > el[2] > el[3]
        assert bend_excess_loss(m, 10.0, f) < 1e-12
        assert bend_excess_loss(m, math.inf, f) == 0.0


# 9

@acc(9, "touchstone (round trip 1e-9 in RI/MA/DB, named errors)")
def test_ac9_touchstone():
    rng = np.random.default_rng(9)
    f = np.sort(rng.uniform(140e9, 220e9, 50))
    net = TwoPortNetwork(f, random_passive_s(rng, 50, reciprocal=False))
    for fmt in ("RI", "MA", "DB"):
        back, _ = parse_touchstone(write_touchstone(net, TouchstoneOptions(format=fmt)))
        assert np.max(np.abs(back.s - net.s) / np.abs(net.s)) < 1e-9
        assert np.max(np.abs(back.f / net.f - 1)) < 1e-9
    with pytest.raises(MalformedOptionLine):
        parse_touchstone("# GHZ S QQ R 50\n140 0 0 1 0 1 0 0 0\n")
    with pytest.raises(WrongColumnCount):
        parse_touchstone("# GHZ S RI R 50\n140 0 0 1 0 1 0 0\n")


# 10

N_NETWORKS = 128


@acc(10, "network algebra over >= 100 seeded random passive networks")
def test_ac10_network_algebra():
    rng = np.random.default_rng(10)
    f = np.arange(1, N_NETWORKS + 1) * 1e9
    a, b, c = (TwoPortNetwork(f, random_passive_s(rng, N_NETWORKS)) for _ in range(3))
    back = t_to_s(s_to_t(a.s))
    assert np.max(np.abs(back - a.s) / np.abs(a.s).max(axis=(1, 2))[:, None, None]) < 1e-10
    left, right = cascade(cascade(a, b), c), cascade(a, cascade(b, c))
    assert np.max(np.abs(left.s - right.s)) < 1e-10
    ab = cascade(a, b)
    assert np.max(np.abs(ab.s12 - ab.s21)) < 1e-10
    assert np.all(ab.max_singular_value() <= 1 + 1e-9)
    assert np.all(left.max_singular_value() <= 1 + 1e-9)
