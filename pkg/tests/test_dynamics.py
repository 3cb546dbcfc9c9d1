"""Propagation routes against closed-form oracles, plus ladder/trace plumbing.

The Lindblad routes restricted to the single-excitation sector with pure-loss
baths are equivalent to non-Hermitian amplitude evolution (the refill term
only feeds the ground state), so scipy.linalg.expm gives machine-accurate
references for every discrete-mode and Markovian case.  The amplitude solver
is checked against a flat-spectrum Markov limit and against the Lindblad
route on a single Lorentzian mode.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from epsim import (
    EffectiveModeSet,
    Emitter,
    Environment,
    PopulationTrace,
    RateAndShiftMatrices,
    SpectralDensityGrid,
    TraceMetric,
    compare_traces,
    effective_total_density,
    lindblad_rhs,
    lorentzian_model,
    propagate_cqed,
    propagate_cqed_ddi,
    propagate_mqed_dmma,
    propagate_mqed_wf,
    spectral_density,
    time_grid,
    validate_scenario,
)
from epsim import fixtures
from epsim.core import (
    HBAR_EV_FS,
    GridMismatch,
    KernelGridTooCoarse,
    NonDegenerateEmitters,
    ShapeMismatch,
    StepSizeTooLarge,
)
from epsim.dynamics import SingleExcitationSpace

E0 = 3.525
DIP = (10.0, 0.0, 0.0)


def one_emitter():
    em = Emitter(position_nm=(0.0, 0.0, 7.0), energy_ev=E0, dipole_debye=DIP)
    return validate_scenario((em,), Environment.free_space())


def two_emitters(d_nm=1.5):
    ems = (Emitter(position_nm=(0.0, 0.0, 7.0), energy_ev=E0, dipole_debye=DIP),
           Emitter(position_nm=(d_nm, 0.0, 7.0), energy_ev=E0, dipole_debye=DIP))
    return validate_scenario(ems, Environment.free_space())


def amplitude_oracle(h_nh_ev, t_grid):
    """|c_i(t)|^2 for c' = -i H_nh c / hbar starting from c = (1, 0, ...)."""
    c0 = np.zeros(h_nh_ev.shape[0], dtype=complex)
    c0[0] = 1.0
    out = np.empty((t_grid.size, c0.size))
    for i, ti in enumerate(t_grid):
        c = expm(-1j * np.asarray(h_nh_ev, dtype=complex) * ti / HBAR_EV_FS) @ c0
        out[i] = np.abs(c) ** 2
    return out


# ---------------------------------------------------------------------------
# time grid
# ---------------------------------------------------------------------------

def test_time_grid_inclusive_endpoints():
    t = time_grid(10.0, 0.5)
    assert t.size == 21
    assert t[0] == 0.0
    assert t[-1] == pytest.approx(10.0, abs=1e-12)


def test_time_grid_rejects_nonpositive():
    with pytest.raises(ValueError):
        time_grid(0.0, 0.1)
    with pytest.raises(ValueError):
        time_grid(10.0, -0.1)


def test_nonuniform_grid_rejected():
    scn = one_emitter()
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.1,),
                          couplings_ev=((0.05,),))
    with pytest.raises(ValueError):
        propagate_cqed(scn, ms, np.array([0.0, 0.1, 0.3]))
    with pytest.raises(ValueError):
        propagate_cqed(scn, ms, np.array([1.0, 2.0, 3.0]))


# ---------------------------------------------------------------------------
# excitation ladder
# ---------------------------------------------------------------------------

def test_space_dimension_single_excitation():
    sp = SingleExcitationSpace.build(3, 4, 1)
    assert sp.dim == 1 + 3 + 4
    assert sp.labels()[0] == "G"
    assert "E2" in sp.labels()
    assert "P4" in sp.labels()


def test_space_two_excitation_ladder():
    # one emitter, one mode: G, E1, P1, E1+P1, P1+P1
    sp = SingleExcitationSpace.build(1, 1, 2)
    assert sp.dim == 5
    assert sp.index(emitters=(0,), photons=(0,)) >= 0
    assert sp.index(photons=(0, 0)) >= 0
    labels = sp.labels()
    assert "E1+P1" in labels
    assert "P1+P1" in labels


def test_space_index_outside_ladder():
    sp = SingleExcitationSpace.build(2, 1, 1)
    with pytest.raises(KeyError):
        sp.index(emitters=(0, 1))
    with pytest.raises(KeyError):
        sp.index(emitters=(0,), photons=(0,))


def test_sigma_minus_action():
    sp = SingleExcitationSpace.build(2, 0, 1)
    sm = sp.sigma_minus(1)
    v = np.zeros(sp.dim)
    v[sp.index(emitters=(1,))] = 1.0
    out = sm @ v
    assert out[sp.index()] == 1.0
    assert np.sum(np.abs(out)) == 1.0
    # lowering the other emitter from this state gives nothing
    assert np.all(sp.sigma_minus(0) @ v == 0.0)


def test_annihilation_sqrt_factor():
    sp = SingleExcitationSpace.build(1, 1, 2)
    a = sp.annihilation(0)
    v = np.zeros(sp.dim)
    v[sp.index(photons=(0, 0))] = 1.0
    out = a @ v
    assert out[sp.index(photons=(0,))] == pytest.approx(np.sqrt(2.0), rel=1e-15)
    # number operator counts two quanta
    n_op = a.T @ a
    assert n_op[sp.index(photons=(0, 0)), sp.index(photons=(0, 0))] == pytest.approx(2.0)


# ---------------------------------------------------------------------------
# generic Lindblad right-hand side
# ---------------------------------------------------------------------------

def test_lindblad_rhs_two_level_decay():
    gamma = 2e-3
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])
    rho = np.diag([0.0, 1.0]).astype(complex)
    h = np.zeros((2, 2))
    drho = lindblad_rhs(rho, h, [(np.array([[gamma]]), [sm])])
    assert drho[1, 1].real == pytest.approx(-gamma / HBAR_EV_FS, rel=1e-14)
    assert drho[0, 0].real == pytest.approx(gamma / HBAR_EV_FS, rel=1e-14)
    assert abs(np.trace(drho)) < 1e-18


def test_lindblad_rhs_trace_free_and_hermitian():
    rng = np.random.default_rng(7)
    d = 4
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = m @ m.conj().T
    rho /= np.trace(rho).real
    h = rng.normal(size=(d, d))
    h = 0.5 * (h + h.T)
    ops = [rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(2)]
    r = np.array([[0.3, 0.1], [0.1, 0.2]])
    drho = lindblad_rhs(rho, h, [(r, ops)])
    assert abs(np.trace(drho)) < 1e-12
    assert np.max(np.abs(drho - drho.conj().T)) < 1e-18


def test_lindblad_rhs_shape_errors():
    rho = np.eye(2, dtype=complex)
    with pytest.raises(ShapeMismatch):
        lindblad_rhs(np.ones((2, 3)), np.eye(2))
    with pytest.raises(ShapeMismatch):
        lindblad_rhs(rho, np.eye(3))
    with pytest.raises(ShapeMismatch):
        lindblad_rhs(rho, np.eye(2), [(np.ones((2, 2)), [np.eye(2)])])
    with pytest.raises(ShapeMismatch):
        lindblad_rhs(rho, np.eye(2), [(np.ones((1, 1)), [np.eye(3)])])


# ---------------------------------------------------------------------------
# discrete-mode routes vs expm oracles
# ---------------------------------------------------------------------------

def test_cqed_damped_rabi_vs_oracle():
    scn = one_emitter()
    t = time_grid(60.0, 0.02)
    omega, kappa = 0.05, 0.1
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(kappa,),
                          couplings_ev=((omega,),))
    tr = propagate_cqed(scn, ms, t)
    h_nh = np.array([[0.0, omega], [omega, -0.5j * kappa]])
    ref = amplitude_oracle(h_nh, t)
    assert np.max(np.abs(tr.emitter_pops[:, 0] - ref[:, 0])) < 1e-11
    assert np.max(np.abs(tr.photon_pops[:, 0] - ref[:, 1])) < 1e-11
    assert tr.method == "cqed"
    assert tr.scenario_hash == scn.hash_hex


def test_cqed_lossless_rabi_analytic():
    scn = one_emitter()
    t = time_grid(60.0, 0.02)
    omega = 0.05
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.0,),
                          couplings_ev=((omega,),))
    tr = propagate_cqed(scn, ms, t)
    ref = np.cos(omega * t / HBAR_EV_FS) ** 2
    assert np.max(np.abs(tr.emitter_pops[:, 0] - ref)) < 1e-10
    total = tr.emitter_pops[:, 0] + tr.photon_pops[:, 0]
    assert np.max(np.abs(total - 1.0)) < 1e-10


def test_cqed_detuned_mode_vs_oracle():
    scn = one_emitter()
    t = time_grid(60.0, 0.02)
    omega, kappa, w_mode = 0.04, 0.08, 3.7
    ms = EffectiveModeSet(mode_energies_ev=(w_mode,), mode_widths_ev=(kappa,),
                          couplings_ev=((omega,),))
    tr = propagate_cqed(scn, ms, t)
    h_nh = np.array([[0.0, omega], [omega, (w_mode - E0) - 0.5j * kappa]])
    ref = amplitude_oracle(h_nh, t)
    assert np.max(np.abs(tr.emitter_pops[:, 0] - ref[:, 0])) < 1e-11


def test_cqed_rotating_frame_invariance():
    # shifting all emitter and mode energies together cannot change populations
    t = time_grid(60.0, 0.02)
    scn = one_emitter()
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.1,),
                          couplings_ev=((0.05,),))
    em_s = Emitter(position_nm=(0.0, 0.0, 7.0), energy_ev=E0 + 0.5, dipole_debye=DIP)
    scn_s = validate_scenario((em_s,), Environment.free_space())
    ms_s = EffectiveModeSet(mode_energies_ev=(E0 + 0.5,), mode_widths_ev=(0.1,),
                            couplings_ev=((0.05,),))
    a = propagate_cqed(scn, ms, t)
    b = propagate_cqed(scn_s, ms_s, t)
    assert np.array_equal(a.emitter_pops, b.emitter_pops)
    assert np.array_equal(a.photon_pops, b.photon_pops)


def test_cqed_ddi_zero_rates_reduces_to_cqed():
    scn = one_emitter()
    t = time_grid(60.0, 0.02)
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.1,),
                          couplings_ev=((0.05,),))
    z = np.zeros((1, 1))
    rates = RateAndShiftMatrices(gamma0_ev=z, v0_ev=z, gamma_total_ev=z,
                                 v_total_ev=z, delta_sc_ev=np.zeros(1))
    a = propagate_cqed_ddi(scn, ms, rates, t)
    b = propagate_cqed(scn, ms, t)
    assert np.array_equal(a.emitter_pops, b.emitter_pops)
    assert np.array_equal(a.photon_pops, b.photon_pops)
    assert a.method == "cqed_ddi"


def test_cqed_ddi_pair_vs_oracle():
    # decoupled photon mode leaves exactly the V0/Gamma0 pair problem
    scn = two_emitters()
    t = time_grid(100.0, 0.02)
    g0, g12, v12 = 4.744e-7, 3.2e-7, 0.0185
    gam = np.array([[g0, g12], [g12, g0]])
    vv = np.array([[0.0, v12], [v12, 0.0]])
    rates = RateAndShiftMatrices(gamma0_ev=gam, v0_ev=vv, gamma_total_ev=gam,
                                 v_total_ev=vv, delta_sc_ev=np.zeros(2))
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.2,),
                          couplings_ev=((0.0,), (0.0,)))
    tr = propagate_cqed_ddi(scn, ms, rates, t)
    ref = amplitude_oracle(vv - 0.5j * gam, t)
    assert np.max(np.abs(tr.emitter_pops - ref)) < 1e-12


def test_dmma_single_emitter_exponential():
    scn = one_emitter()
    t = time_grid(60.0, 0.02)
    gamma = 2e-3
    z = np.zeros((1, 1))
    rates = RateAndShiftMatrices(gamma0_ev=np.array([[gamma]]), v0_ev=z,
                                 gamma_total_ev=np.array([[gamma]]), v_total_ev=z,
                                 delta_sc_ev=np.zeros(1))
    tr = propagate_mqed_dmma(scn, rates, t)
    assert np.max(np.abs(tr.emitter_pops[:, 0] - np.exp(-gamma * t / HBAR_EV_FS))) < 1e-12
    assert tr.method == "mqed_dmma"
    assert tr.n_modes == 0


def test_dmma_pair_vs_oracle():
    scn = two_emitters()
    t = time_grid(100.0, 0.02)
    g0, g12, v12 = 4.744e-7, 3.2e-7, 0.0185
    gam = np.array([[g0, g12], [g12, g0]])
    vv = np.array([[0.0, v12], [v12, 0.0]])
    rates = RateAndShiftMatrices(gamma0_ev=gam, v0_ev=vv, gamma_total_ev=gam,
                                 v_total_ev=vv, delta_sc_ev=np.zeros(2))
    tr = propagate_mqed_dmma(scn, rates, t)
    ref = amplitude_oracle(vv - 0.5j * gam, t)
    assert np.max(np.abs(tr.emitter_pops - ref)) < 1e-12


def test_dmma_scattered_shift_detunes_the_pair():
    # unequal delta_sc breaks the degeneracy; oracle carries the +-delta/2 diagonal
    scn = two_emitters()
    t = time_grid(100.0, 0.02)
    g0, g12, v12, d2 = 4.744e-7, 3.2e-7, 0.0185, 0.05
    gam = np.array([[g0, g12], [g12, g0]])
    vv = np.array([[0.0, v12], [v12, 0.0]])
    rates = RateAndShiftMatrices(gamma0_ev=gam, v0_ev=vv, gamma_total_ev=gam,
                                 v_total_ev=vv, delta_sc_ev=np.array([0.0, d2]))
    tr = propagate_mqed_dmma(scn, rates, t)
    h_nh = np.array([[-0.5 * d2, v12], [v12, 0.5 * d2]]) - 0.5j * gam
    ref = amplitude_oracle(h_nh, t)
    assert np.max(np.abs(tr.emitter_pops - ref)) < 1e-11


def test_initial_emitter_selects_start_state():
    scn = two_emitters()
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.1,),
                          couplings_ev=((0.03,), (0.03,)))
    tr = propagate_cqed(scn, ms, time_grid(10.0, 0.02), initial_emitter=1)
    assert tr.emitter_pops[0, 1] == 1.0
    assert tr.emitter_pops[0, 0] == 0.0


def test_step_halving_converged():
    scn = fixtures.scenario_for("fig4b")
    ms = fixtures.modeset_for("fig4b")
    pa = propagate_cqed(scn, ms, time_grid(50.0, 0.05)).emitter_pops
    pb = propagate_cqed(scn, ms, time_grid(50.0, 0.025)).emitter_pops[::2]
    assert np.max(np.abs(pa - pb)) < 1e-6


def test_step_size_guard_raises():
    scn = one_emitter()
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.1,),
                          couplings_ev=((0.117,),))
    with pytest.raises(StepSizeTooLarge):
        propagate_cqed(scn, ms, time_grid(40.0, 2.0), local_tol=1e-12, check_every=1)


def test_non_rwa_smoke():
    # two-excitation lab-frame ladder; weak coupling keeps it near the RWA run
    scn = one_emitter()
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.1,),
                          couplings_ev=((0.05,),))
    t = time_grid(5.0, 0.005)
    a = propagate_cqed(scn, ms, t)
    b = propagate_cqed(scn, ms, t, rwa=False)
    d = np.max(np.abs(a.emitter_pops - b.emitter_pops))
    assert 1e-8 < d < 1e-4
    assert b.emitter_pops.min() > -1e-8
    assert b.emitter_pops.max() <= 1.0 + 1e-8


def test_lindblad_trace_and_positivity():
    scn = fixtures.scenario_for("fig4b")
    ms = fixtures.modeset_for("fig4b")
    tr = propagate_cqed_ddi(scn, ms, _free_space_rates(scn), time_grid(100.0, 0.05))
    total = tr.emitter_pops.sum(axis=1) + tr.photon_pops.sum(axis=1) + tr.ground_pop
    assert np.max(np.abs(total - 1.0)) < 1e-6
    assert tr.emitter_pops.min() > -1e-6
    assert tr.photon_pops.min() > -1e-6
    assert tr.ground_pop.min() > -1e-6


def _free_space_rates(scn):
    from epsim import rate_and_shift_matrices
    return rate_and_shift_matrices(scn)


# ---------------------------------------------------------------------------
# amplitude solver
# ---------------------------------------------------------------------------

OMEGAS = np.linspace(2.025, 5.025, 2000)


def test_wf_flat_spectrum_markov_limit():
    # constant J: population decay 2 pi J, window ripple a few 1e-4
    scn = one_emitter()
    jbar = 1e-4
    grid = SpectralDensityGrid(omegas_ev=OMEGAS,
                               values=np.full((OMEGAS.size, 1, 1), jbar),
                               part="scattering")
    t = time_grid(200.0, 0.05)
    tr = propagate_mqed_wf(grid, scn, t, counter_rotating=False,
                           markov_free_space=False)
    p = tr.emitter_pops[:, 0]
    assert np.max(np.abs(p - np.exp(-2.0 * np.pi * jbar * t))) < 1e-3
    assert np.all(np.diff(p) <= 0.0)
    assert tr.method == "mqed_wf"


def test_wf_counter_rotating_inert_for_one_emitter():
    scn = one_emitter()
    grid = SpectralDensityGrid(omegas_ev=OMEGAS,
                               values=np.full((OMEGAS.size, 1, 1), 1e-4),
                               part="scattering")
    t = time_grid(200.0, 0.05)
    a = propagate_mqed_wf(grid, scn, t, counter_rotating=True, markov_free_space=False)
    b = propagate_mqed_wf(grid, scn, t, counter_rotating=False, markov_free_space=False)
    assert np.max(np.abs(a.emitter_pops - b.emitter_pops)) < 1e-13


def test_wf_matches_lindblad_on_single_mode():
    scn = one_emitter()
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.05,),
                          couplings_ev=((0.01,),))
    grid = lorentzian_model(ms, OMEGAS)
    t = time_grid(60.0, 0.02)
    a = propagate_mqed_wf(grid, scn, t, counter_rotating=False,
                          markov_free_space=False)
    b = propagate_cqed(scn, ms, t)
    assert np.max(np.abs(a.emitter_pops[:, 0] - b.emitter_pops[:, 0])) < 1e-5


def test_wf_total_equals_scattering_plus_markov():
    # subtracting the homogeneous density from a total grid and re-adding its
    # Markov generator must reproduce the scattering-grid run exactly
    scn = fixtures.scenario_for("fig4b")
    ms = fixtures.modeset_for("fig4b")
    t = time_grid(100.0, 0.05)
    a = propagate_mqed_wf(lorentzian_model(ms, OMEGAS), scn, t)
    b = propagate_mqed_wf(effective_total_density(ms, scn, OMEGAS), scn, t)
    assert np.array_equal(a.emitter_pops, b.emitter_pops)


def test_wf_free_space_part_is_markov_exponential():
    scn = fixtures.scenario_for("fig4b")
    grid = SpectralDensityGrid(
        omegas_ev=OMEGAS,
        values=spectral_density(scn, OMEGAS, part="free_space").values,
        part="free_space")
    t = time_grid(100.0, 0.05)
    tr = propagate_mqed_wf(grid, scn, t)
    j0 = spectral_density(scn, np.array([E0]), part="free_space").values[0, 0, 0]
    ref = np.exp(-2.0 * np.pi * j0 * t)
    assert np.max(np.abs(tr.emitter_pops[:, 0] - ref)) < 1e-12
    assert np.max(np.abs(tr.ground_pop + tr.emitter_pops.sum(axis=1) - 1.0)) == 0.0


def test_wf_strong_coupling_revival():
    # the norm is only monotone in weak coupling; a deep-gap mode set revives
    scn = fixtures.scenario_for("fig4b")
    grid = lorentzian_model(fixtures.modeset_for("fig4b"), OMEGAS)
    tr = propagate_mqed_wf(grid, scn, time_grid(200.0, 0.05))
    p = tr.emitter_pops[:, 0]
    assert np.max(p - np.minimum.accumulate(p)) > 0.01


def test_wf_counter_rotating_acts_between_emitters():
    scn = fixtures.scenario_for("fig5d")
    grid = lorentzian_model(fixtures.modeset_for("fig5d"), OMEGAS)
    t = time_grid(100.0, 0.05)
    a = propagate_mqed_wf(grid, scn, t, counter_rotating=True)
    b = propagate_mqed_wf(grid, scn, t, counter_rotating=False)
    d = np.max(np.abs(a.emitter_pops - b.emitter_pops))
    assert 1e-5 < d < 1e-2


def test_wf_rejects_coarse_kernel_grid():
    scn = one_emitter()
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.05,),
                          couplings_ev=((0.01,),))
    coarse = np.linspace(2.025, 5.025, 30)
    grid = lorentzian_model(ms, coarse)
    with pytest.raises(KernelGridTooCoarse):
        propagate_mqed_wf(grid, scn, time_grid(50.0, 0.05), markov_free_space=False)


def test_wf_rejects_tiny_grid():
    scn = one_emitter()
    grid = SpectralDensityGrid(omegas_ev=np.linspace(3.0, 4.0, 6),
                               values=np.full((6, 1, 1), 1e-4), part="scattering")
    with pytest.raises(KernelGridTooCoarse):
        propagate_mqed_wf(grid, scn, time_grid(10.0, 0.05), markov_free_space=False)


def test_wf_requires_degenerate_emitters():
    ems = (Emitter(position_nm=(0.0, 0.0, 7.0), energy_ev=3.5, dipole_debye=DIP),
           Emitter(position_nm=(1.5, 0.0, 7.0), energy_ev=3.6, dipole_debye=DIP))
    scn = validate_scenario(ems, Environment.free_space())
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.1,),
                          couplings_ev=((0.05,), (0.05,)))
    with pytest.raises(NonDegenerateEmitters):
        propagate_mqed_wf(lorentzian_model(ms, OMEGAS), scn, time_grid(10.0, 0.05))


def test_wf_rejects_emitter_count_mismatch():
    scn = two_emitters()
    grid = SpectralDensityGrid(omegas_ev=OMEGAS,
                               values=np.full((OMEGAS.size, 1, 1), 1e-4),
                               part="scattering")
    with pytest.raises(ShapeMismatch):
        propagate_mqed_wf(grid, scn, time_grid(10.0, 0.05))


# ---------------------------------------------------------------------------
# trace containers
# ---------------------------------------------------------------------------

def test_population_trace_csv_round_trip(tmp_path):
    scn = one_emitter()
    ms = EffectiveModeSet(mode_energies_ev=(E0,), mode_widths_ev=(0.1,),
                          couplings_ev=((0.05,),))
    tr = propagate_cqed(scn, ms, time_grid(20.0, 0.1))
    path = tmp_path / "trace.csv"
    tr.to_csv(path)
    back = PopulationTrace.from_csv(path, method="cqed")
    assert back.n_emitters == 1
    assert back.n_modes == 1
    np.testing.assert_allclose(back.times_fs, tr.times_fs, atol=1e-6)
    np.testing.assert_allclose(back.emitter_pops, tr.emitter_pops, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(back.photon_pops, tr.photon_pops, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(back.ground_pop, tr.ground_pop, rtol=1e-10, atol=1e-14)
    assert back.method == "cqed"


def test_population_trace_shape_guard():
    with pytest.raises(ShapeMismatch):
        PopulationTrace(times_fs=np.zeros(3), emitter_pops=np.zeros((2, 1)),
                        photon_pops=np.zeros((3, 0)), ground_pop=np.zeros(3))


def test_compare_traces_metrics():
    t = np.array([0.0, 1.0, 2.0])
    a = PopulationTrace(times_fs=t, emitter_pops=np.array([[1.0], [0.5], [0.25]]),
                        photon_pops=np.zeros((3, 0)), ground_pop=np.zeros(3))
    b = PopulationTrace(times_fs=t, emitter_pops=np.zeros((3, 1)),
                        photon_pops=np.zeros((3, 0)), ground_pop=np.zeros(3))
    (m,) = compare_traces(a, b)
    assert isinstance(m, TraceMetric)
    assert m.emitter == 1
    assert m.max_abs_diff == 1.0
    assert m.t_at_max_fs == 0.0
    assert m.l2 == pytest.approx(np.sqrt((1.0 + 0.25 + 0.0625) / 3.0), rel=1e-14)


def test_compare_traces_grid_mismatch():
    a = PopulationTrace(times_fs=np.array([0.0, 1.0]), emitter_pops=np.zeros((2, 1)),
                        photon_pops=np.zeros((2, 0)), ground_pop=np.zeros(2))
    b = PopulationTrace(times_fs=np.array([0.0, 2.0]), emitter_pops=np.zeros((2, 1)),
                        photon_pops=np.zeros((2, 0)), ground_pop=np.zeros(2))
    with pytest.raises(GridMismatch):
        compare_traces(a, b)
    c = PopulationTrace(times_fs=np.array([0.0, 1.0]), emitter_pops=np.zeros((2, 2)),
                        photon_pops=np.zeros((2, 0)), ground_pop=np.zeros(2))
    with pytest.raises(GridMismatch):
        compare_traces(a, c)


# ---------------------------------------------------------------------------
# property: random single-mode models stay physical
# ---------------------------------------------------------------------------

@settings(max_examples=15, deadline=None)
@given(w_mode=st.floats(3.0, 4.0), kappa=st.floats(0.0, 0.3),
       omega=st.floats(0.001, 0.15))
def test_cqed_stays_physical(w_mode, kappa, omega):
    scn = one_emitter()
    ms = EffectiveModeSet(mode_energies_ev=(w_mode,), mode_widths_ev=(kappa,),
                          couplings_ev=((omega,),))
    tr = propagate_cqed(scn, ms, time_grid(30.0, 0.05))
    total = tr.emitter_pops.sum(axis=1) + tr.photon_pops.sum(axis=1) + tr.ground_pop
    assert tr.emitter_pops[0, 0] == 1.0
    assert np.max(np.abs(total - 1.0)) < 1e-6
    assert tr.emitter_pops.min() > -1e-6
    assert tr.emitter_pops.max() <= 1.0 + 1e-6
