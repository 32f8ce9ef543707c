import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import dilkit.modesolver as ms
from dilkit.errors import InputError, NoConvergence
from dilkit.modesolver import E_NORMAL, E_PARALLEL, ImageLineGeometry, beta_profile, image_line_mode, slab_neff
from dilkit.netcore import frequency_grid
from oracles import image_line_oracle, slab_confinement_oracle, slab_oracle

C = 299792458.0
N_CORE = math.sqrt(2.2)

# Dense-scan oracle values, frozen before the solver was written.
GOLDEN_SLAB_TM = (1.2093270241814817, 0.6826992232545849)  # 0.648 mm, 180 GHz
GOLDEN_SLAB_TE = (1.3027560097525726, 0.7926227481242502)
GOLDEN_DIL_180 = dict(n_eff=1.1439128593235826, n_y=1.2090993185823458,
                      conf_x=0.8591081694197383, conf_y=0.682143053622202)
GOLDEN_DIL_140 = 1.0678127757222997
GOLDEN_DIL_220 = 1.2146660257308655


def test_slab_golden():
    n, _, conf = slab_neff(0.648e-3, N_CORE, 1.0, E_NORMAL, 180e9)
    assert n == pytest.approx(GOLDEN_SLAB_TM[0], abs=1e-12)
    assert conf == pytest.approx(GOLDEN_SLAB_TM[1], abs=1e-9)
    n, _, conf = slab_neff(0.648e-3, N_CORE, 1.0, E_PARALLEL, 180e9)
    assert n == pytest.approx(GOLDEN_SLAB_TE[0], abs=1e-12)
    assert conf == pytest.approx(GOLDEN_SLAB_TE[1], abs=1e-9)


def test_dil_golden():
    m = image_line_mode(ImageLineGeometry(), 180e9)
    for key, attr in (("n_eff", "n_eff"), ("n_y", "n_eff_y"), ("conf_x", "conf_x"), ("conf_y", "conf_y")):
        assert getattr(m, attr) == pytest.approx(GOLDEN_DIL_180[key], abs=1e-10)
    m = image_line_mode(ImageLineGeometry(), [140e9, 220e9])
    np.testing.assert_allclose(m.n_eff, [GOLDEN_DIL_140, GOLDEN_DIL_220], atol=1e-10)


def test_dil_matches_live_oracle():
    for f in (140e9, 180e9, 220e9):
        nx, ny, cx, cy = image_line_oracle(1.295e-3, 1.295e-3 / 4, 2.2, f)
        m = image_line_mode(ImageLineGeometry(), f)
        assert abs(m.n_eff - nx) < 1e-6 and abs(m.n_eff_y - ny) < 1e-6
        assert abs(m.conf_x - cx) < 1e-6 and abs(m.conf_y - cy) < 1e-6


@given(
    d=st.floats(0.3e-3, 3e-3),
    eps=st.floats(1.5, 12.0),
    f=st.floats(100e9, 400e9),
    tm=st.booleans(),
)
def test_slab_matches_oracle(d, eps, f, tm):
    n1 = math.sqrt(eps)
    n, _, conf = slab_neff(d, n1, 1.0, E_NORMAL if tm else E_PARALLEL, f)
    ref = slab_oracle(d, n1, 1.0, tm, f, resolution=2e-5)
    assert abs(n - ref) < 1e-6
    assert abs(conf - slab_confinement_oracle(d, n1, 1.0, tm, f, ref)) < 1e-6


@given(
    d=st.floats(1e-5, 1e-2),
    n1=st.floats(1.001, 4.0),
    f=st.floats(1e9, 1e12),
    tm=st.booleans(),
)
def test_slab_bracket_and_residual(d, n1, f, tm):
    n, decay, conf, res = slab_neff(d, n1, 1.0, E_NORMAL if tm else E_PARALLEL, f, return_residual=True)
    assert 1.0 < n < n1 or (n == pytest.approx(1.0, abs=1e-12) and decay >= 0)
    assert abs(res) < 1e-12
    assert 0 <= conf <= 1


def test_slab_limits():
    n, _, conf = slab_neff(0.5e-3, 1.0 + 1e-9, 1.0, E_PARALLEL, 100e9)
    assert n - 1.0 < 1e-9 and conf < 1e-6
    n, _, conf = slab_neff(1.0, N_CORE, 1.0, E_PARALLEL, 1e12)
    assert N_CORE - n < 1e-6 and conf > 0.999


def test_slab_rejects_bad_input():
    with pytest.raises(InputError):
        slab_neff(1e-3, 1.0, 1.0, E_PARALLEL, 1e9)
    with pytest.raises(InputError):
        slab_neff(1e-3, 1.5, 1.0, E_PARALLEL, 0.0)
    with pytest.raises(ValueError):
        slab_neff(1e-3, 1.5, 1.0, "TEM", 1e9)


def test_no_convergence(monkeypatch):
    monkeypatch.setattr(ms, "MAX_BISECTIONS", 10)
    with pytest.raises(NoConvergence):
        slab_neff(1e-3, 1.5, 1.0, E_PARALLEL, 1e11)


def test_y_slab_solved_once_at_double_height(monkeypatch):
    calls = []
    real = ms.slab_neff

    def spy(thickness, n_core, n_clad, polarization, f, **kw):
        calls.append((polarization, np.asarray(thickness).copy()))
        return real(thickness, n_core, n_clad, polarization, f, **kw)

    monkeypatch.setattr(ms, "slab_neff", spy)
    geom = ImageLineGeometry()
    image_line_mode(geom, frequency_grid(140e9, 220e9, 10e9))
    y_calls = [t for p, t in calls if p == E_NORMAL]
    assert len(y_calls) == 1
    assert np.all(y_calls[0] == 2 * geom.height_b)
    assert [p for p, _ in calls].count(E_PARALLEL) == 1


def test_geometry_invariants():
    for kw in (dict(width_a=0), dict(height_b=-1), dict(eps_r=1.0), dict(eps_clad=0.5),
               dict(tan_delta=-1e-4), dict(conductor_sigma=0), dict(roughness_rq=-1e-9)):
        with pytest.raises(InputError):
            ImageLineGeometry(**kw)
    with pytest.warns(UserWarning, match="aspect"):
        ImageLineGeometry(height_b=1.295e-3 / 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ImageLineGeometry(height_b=1.295e-3 / 4.5)


def test_mode_solution_invariants(band):
    geom = ImageLineGeometry()
    m = image_line_mode(geom, band)
    assert np.all((m.n_eff > 1.0) & (m.n_eff < N_CORE))
    assert np.all(np.diff(m.n_eff) > 0)
    assert np.all(m.gamma_x > 0) and np.all(m.gamma_y > 0)
    assert np.all((m.conf_x > 0) & (m.conf_x <= 1) & (m.conf_y > 0) & (m.conf_y <= 1))
    assert m.conf_total[-1] > m.conf_total[0]
    np.testing.assert_array_equal(m.beta, 2 * np.pi * band * m.n_eff / C)


def test_beta_profile(band):
    geom = ImageLineGeometry()
    (b,) = beta_profile(geom, [180e9])
    assert b == 2 * np.pi * 180e9 * image_line_mode(geom, 180e9).n_eff / C
    beta = beta_profile(geom, band)
    fit = np.polyval(np.polyfit(band, beta, 1), band)
    assert np.max(np.abs(beta - fit) / beta) < 0.02
    b1, b2 = beta_profile(geom, [100e9, 200e9])
    assert b2 > 2 * b1
    with pytest.raises(InputError):
        image_line_mode(geom, 0.0)
