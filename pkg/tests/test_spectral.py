"""Spectral densities, overlap factorization, rate/shift matrices."""

import math

import numpy as np
import pytest
import scipy.constants as sc

from epsim import (
    Emitter,
    Environment,
    NonpositiveFrequency,
    NotPositiveSemidefinite,
    ShapeMismatch,
    SpectralDensityGrid,
    ZeroDiagonal,
    core,
    coupling_factor_w,
    free_space_couplings_g,
    normalized_overlap_matrix,
    rate_and_shift_matrices,
    spectral_density,
    validate_scenario,
)

DRUDE = Environment.drude_half_space(5.0, 0.1)
FREE = Environment.free_space()


def _single(energy=3.525, dipole=(0.0, 0.0, 10.0), h=7.0, env=FREE):
    em = Emitter(position_nm=(0.0, 0.0, h), energy_ev=energy, dipole_debye=dipole)
    return validate_scenario((em,), env)


def _pair(d=1.5, dipole=(0.0, 0.0, 10.0), h=7.0, env=FREE, energy=3.525):
    ems = (Emitter(position_nm=(0.0, 0.0, h), energy_ev=energy, dipole_debye=dipole),
           Emitter(position_nm=(d, 0.0, h), energy_ev=energy, dipole_debye=dipole))
    return validate_scenario(ems, env)


# ---------------------------------------------------------------------------
# free-space rates against an independent SI chain
# ---------------------------------------------------------------------------

def si_decay_rate_ev(energy_ev: float, dipole_debye: float) -> float:
    """Spontaneous-emission rate gamma = w^3 mu^2 / (3 pi eps0 hbar c^3), eV."""
    mu = dipole_debye * 1e-21 / sc.c
    w = energy_ev * sc.e / sc.hbar
    gamma_per_s = w**3 * mu**2 / (3 * math.pi * sc.epsilon_0 * sc.hbar * sc.c**3)
    return gamma_per_s * sc.hbar / sc.e


def test_free_space_rate_matches_si_formula():
    rates = rate_and_shift_matrices(_single())
    expected = si_decay_rate_ev(3.525, 10.0)
    assert rates.gamma0_ev[0, 0] == pytest.approx(expected, rel=1e-9)
    # magnitude anchor: ~0.47 ueV for a 10 D dipole in the UV
    assert rates.gamma0_ev[0, 0] == pytest.approx(4.744e-7, rel=1e-3)


def test_rate_scales_as_cube_of_energy_and_square_of_dipole():
    base = rate_and_shift_matrices(_single(energy=2.0, dipole=(0, 0, 5.0)))
    e_scaled = rate_and_shift_matrices(_single(energy=4.0, dipole=(0, 0, 5.0)))
    d_scaled = rate_and_shift_matrices(_single(energy=2.0, dipole=(0, 0, 15.0)))
    assert e_scaled.gamma0_ev[0, 0] / base.gamma0_ev[0, 0] == pytest.approx(8.0, rel=1e-12)
    assert d_scaled.gamma0_ev[0, 0] / base.gamma0_ev[0, 0] == pytest.approx(9.0, rel=1e-12)


def test_spectral_density_reproduces_decay_rate_at_resonance():
    scn = _single()
    j = spectral_density(scn, np.array([3.525]), part="free_space").values[0, 0, 0]
    gamma = rate_and_shift_matrices(scn).gamma0_ev[0, 0]
    assert 2 * math.pi * core.HBAR_EV_FS * j == pytest.approx(gamma, rel=1e-12)


def test_near_zone_coupling_matches_static_dipole_dipole():
    """Closely spaced parallel dipoles: V -> mu^2 kappa / (4 pi eps0 d^3) with
    the usual orientation factor kappa (+1 side by side, -2 head to tail)."""
    d_nm = 1.5
    mu = 10 * 1e-21 / sc.c
    v_si = mu**2 / (4 * math.pi * sc.epsilon_0 * (d_nm * 1e-9) ** 3) / sc.e

    side = rate_and_shift_matrices(_pair(d=d_nm, dipole=(0, 0, 10.0)))
    assert side.v0_ev[0, 1] == pytest.approx(v_si, rel=2e-3)

    head = rate_and_shift_matrices(_pair(d=d_nm, dipole=(10.0, 0, 0)))
    assert head.v0_ev[0, 1] == pytest.approx(-2.0 * v_si, rel=2e-3)


def test_coupling_diagonal_is_zero():
    rates = rate_and_shift_matrices(_pair())
    assert rates.v0_ev[0, 0] == 0.0
    assert rates.v0_ev[1, 1] == 0.0
    np.testing.assert_allclose(rates.v0_ev, rates.v0_ev.T, atol=0)
    np.testing.assert_allclose(rates.gamma0_ev, rates.gamma0_ev.T, atol=0)


def test_collective_rate_approaches_single_rate_at_contact():
    rates = rate_and_shift_matrices(_pair(d=0.01))
    assert rates.gamma0_ev[0, 1] == pytest.approx(rates.gamma0_ev[0, 0], rel=1e-4)


def test_cross_rate_decays_with_separation():
    near = rate_and_shift_matrices(_pair(d=2.0)).gamma0_ev
    far = rate_and_shift_matrices(_pair(d=20000.0)).gamma0_ev
    assert abs(far[0, 1]) < 1e-2 * abs(near[0, 1])
    assert far[0, 0] == pytest.approx(near[0, 0], rel=1e-12)


def test_free_space_environment_copies_rates_into_totals():
    rates = rate_and_shift_matrices(_pair())
    np.testing.assert_array_equal(rates.gamma_total_ev, rates.gamma0_ev)
    np.testing.assert_array_equal(rates.v_total_ev, rates.v0_ev)
    np.testing.assert_array_equal(rates.delta_sc_ev, np.zeros(2))


def test_surface_enhances_decay_rate():
    free = rate_and_shift_matrices(_single(env=FREE, h=7.0))
    surf = rate_and_shift_matrices(_single(env=DRUDE, h=7.0), rtol=1e-6)
    assert surf.gamma_total_ev[0, 0] > 2.0 * free.gamma0_ev[0, 0]
    assert surf.delta_sc_ev[0] != 0.0


# ---------------------------------------------------------------------------
# sampled density grids
# ---------------------------------------------------------------------------

def test_total_is_sum_of_parts():
    scn = _pair(d=1.5, dipole=(10.0, 0, 0), env=DRUDE)
    omegas = np.array([3.0, 3.525, 4.0])
    kw = dict(rtol=1e-6)
    total = spectral_density(scn, omegas, part="total", **kw).values
    free = spectral_density(scn, omegas, part="free_space", **kw).values
    scat = spectral_density(scn, omegas, part="scattering", **kw).values
    np.testing.assert_allclose(total, free + scat, rtol=0,
                               atol=1e-12 * np.max(np.abs(total)))


def test_scattering_part_is_zero_in_free_space():
    scn = _pair()
    vals = spectral_density(scn, np.array([3.0, 3.5]), part="scattering").values
    np.testing.assert_array_equal(vals, 0.0)


def test_density_grid_is_symmetric_in_emitters():
    scn = _pair(d=2.0, dipole=(10.0, 0, 0))
    grid = spectral_density(scn, np.linspace(2.5, 4.5, 7), part="free_space")
    np.testing.assert_array_equal(grid.values, np.swapaxes(grid.values, 1, 2))


def test_density_matrix_is_positive_semidefinite():
    scn = _pair(d=1.5, dipole=(10.0, 0, 0))
    grid = spectral_density(scn, np.linspace(2.2, 4.8, 25), part="free_space")
    evals = np.linalg.eigvalsh(grid.values)
    assert evals.min() >= -1e-12 * evals.max()


def test_total_density_above_surface_is_positive_semidefinite():
    scn = _pair(d=1.5, dipole=(10.0, 0, 0), h=1.0, env=DRUDE)
    grid = spectral_density(scn, np.array([3.2, 3.525, 3.8]), part="total", rtol=1e-6)
    evals = np.linalg.eigvalsh(grid.values)
    assert evals.min() >= -1e-10 * evals.max()


def test_unknown_part_rejected():
    with pytest.raises(ValueError):
        spectral_density(_single(), np.array([3.0]), part="reflected")


def test_nonpositive_sample_energy_rejected():
    with pytest.raises(NonpositiveFrequency):
        spectral_density(_single(), np.array([1.0, 0.0, 2.0]))
    with pytest.raises(NonpositiveFrequency):
        spectral_density(_single(), np.array([-3.0]))


def test_csv_round_trip_preserves_grid():
    scn = _pair(d=1.5, dipole=(10.0, 0, 0))
    grid = spectral_density(scn, np.linspace(2.5, 4.5, 40), part="free_space")
    path = "jfree_roundtrip.csv"
    import os
    import tempfile
    with tempfile.TemporaryDirectory() as tmp:
        full = os.path.join(tmp, path)
        grid.to_csv(full)
        back = SpectralDensityGrid.from_csv(full, part="free_space")
        assert back.part == "free_space"
        np.testing.assert_allclose(back.omegas_ev, grid.omegas_ev, rtol=1e-11)
        # 11 significant digits survive the text format
        np.testing.assert_allclose(back.values, grid.values, rtol=1e-10,
                                   atol=1e-16 * np.max(np.abs(grid.values)))
        assert back.n_emitters == 2


def test_csv_default_part_is_total():
    import os
    import tempfile
    grid = spectral_density(_single(), np.linspace(3.0, 4.0, 10), part="free_space")
    with tempfile.TemporaryDirectory() as tmp:
        full = os.path.join(tmp, "j.csv")
        grid.to_csv(full)
        assert SpectralDensityGrid.from_csv(full).part == "total"


# ---------------------------------------------------------------------------
# overlap factorization
# ---------------------------------------------------------------------------

def test_overlap_matrix_normalization():
    j = np.array([[4.0, 1.0], [1.0, 1.0]])
    s = normalized_overlap_matrix(j)
    np.testing.assert_allclose(np.diag(s), [1.0, 1.0])
    assert s[0, 1] == pytest.approx(0.5)


def test_overlap_matrix_rejects_zero_diagonal():
    with pytest.raises(ZeroDiagonal):
        normalized_overlap_matrix(np.array([[0.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(ShapeMismatch):
        normalized_overlap_matrix(np.ones((2, 3)))


def test_coupling_factor_is_matrix_square_root():
    s = np.array([[1.0, 0.6], [0.6, 1.0]])
    w = coupling_factor_w(s)
    np.testing.assert_allclose(w @ w, s, atol=1e-14)
    np.testing.assert_allclose(w, w.T, atol=1e-15)


def test_coupling_factor_rejects_indefinite_overlap():
    with pytest.raises(NotPositiveSemidefinite):
        coupling_factor_w(np.array([[1.0, 1.2], [1.2, 1.0]]))


def test_couplings_reconstruct_free_space_density():
    """sum_l g_al g_bl must rebuild J0_ab on the grid (three emitters)."""
    ems = (Emitter(position_nm=(0, 0, 7.0), energy_ev=3.525, dipole_debye=(10, 0, 0)),
           Emitter(position_nm=(1.5, 0, 7.0), energy_ev=3.525, dipole_debye=(10, 0, 0)),
           Emitter(position_nm=(0.7, 1.1, 7.0), energy_ev=3.525, dipole_debye=(0, 0, 10)))
    scn = validate_scenario(ems, FREE)
    omegas = np.linspace(2.1, 4.9, 31)
    g = free_space_couplings_g(scn, omegas)
    rebuilt = np.einsum("nal,nbl->nab", g, g)
    j0 = spectral_density(scn, omegas, part="free_space").values
    scale = np.max(np.abs(j0))
    assert np.max(np.abs(rebuilt - j0)) <= 1e-9 * scale


def test_couplings_vanish_at_nonpositive_energy():
    g = free_space_couplings_g(_pair(dipole=(10, 0, 0)), np.array([-1.0, 3.5]))
    np.testing.assert_array_equal(g[0], 0.0)
    assert np.max(np.abs(g[1])) > 0.0
