"""Design and analysis toolkit for dielectric image lines (DILs)."""

__version__ = "0.1.0"

from .deembed import LineMeasurement, alpha_from_il_slope, converter_loss, gamma_from_two_lines, unwrap_beta
from .discontinuity import BendModel, TaperSpec, bend_excess_loss, fit_bend_model, taper_reflection, taper_sweep
from .lossmodel import (
    PropagationProfile,
    conductor_alpha,
    db_per_cm_to_np_per_m,
    dielectric_alpha,
    np_per_m_to_db_per_cm,
    total_alpha_profile,
)
from .modesolver import ImageLineGeometry, ModeSolution, beta_profile, image_line_mode, slab_neff
from .netcore import TwoPortNetwork, cascade, frequency_grid, il_db, line_network, rl_db, s_to_t, t_to_s
from .synth import ConverterSpec, make_converter, measured_profile, synth_back_to_back
from .touchstone import TouchstoneOptions, parse_touchstone, read_s2p, write_s2p, write_touchstone
