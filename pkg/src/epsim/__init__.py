"""Emitter-polariton dynamics: spectral densities, mode fits, propagation.

The package computes matrix-valued spectral densities of dipole emitters in
free space or above a lossy planar half-space, fits them to discrete
lossy-mode models, and propagates single-excitation population dynamics by
four routes (two Lindblad mode models, a non-Markovian amplitude solver, and
a Markovian density-matrix reference).
"""

from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all
from .greens import (
    GreenTensor,
    drude_permittivity,
    free_space_green,
    fresnel_coefficients,
    halfspace_scattering_green,
    clear_green_cache,
)
from .spectral import (
    SpectralDensityGrid,
    RateAndShiftMatrices,
    spectral_density,
    normalized_overlap_matrix,
    coupling_factor_w,
    free_space_couplings_g,
    rate_and_shift_matrices,
)
from .modefit import (
    EffectiveModeSet,
    FitReport,
    lorentzian_model,
    resolvent_density,
    effective_total_density,
    fit_modes,
    fit_report,
    read_mode_file,
    write_mode_file,
)
from .dynamics import (
    SingleExcitationSpace,
    PopulationTrace,
    TraceMetric,
    time_grid,
    lindblad_rhs,
    compare_traces,
    propagate_cqed_ddi,
    propagate_cqed,
    propagate_mqed_wf,
    propagate_mqed_dmma,
)
from .fixtures import (
    FIXTURE_IDS,
    list_fixtures,
    scenario_for,
    modeset_for,
    emit_fixture_files,
)
from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = list(_core_all) + [
    "GreenTensor", "drude_permittivity", "free_space_green",
    "fresnel_coefficients", "halfspace_scattering_green", "clear_green_cache",
    "SpectralDensityGrid", "RateAndShiftMatrices", "spectral_density",
    "normalized_overlap_matrix", "coupling_factor_w", "free_space_couplings_g",
    "rate_and_shift_matrices",
    "EffectiveModeSet", "FitReport", "lorentzian_model", "resolvent_density",
    "effective_total_density", "fit_modes", "fit_report", "read_mode_file",
    "write_mode_file",
    "SingleExcitationSpace", "PopulationTrace", "TraceMetric", "time_grid",
    "lindblad_rhs", "compare_traces", "propagate_cqed_ddi", "propagate_cqed",
    "propagate_mqed_wf", "propagate_mqed_dmma",
    "FIXTURE_IDS", "list_fixtures", "scenario_for", "modeset_for",
    "emit_fixture_files",
    "kernel_backend",
]
