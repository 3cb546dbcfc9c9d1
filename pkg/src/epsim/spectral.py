"""Generalized spectral densities and the rate/shift matrices they induce.

The central object is the matrix-valued density J_ab(omega) built from the
imaginary part of the environment Green tensor contracted with the emitter
dipoles.  Values carry 1/fs so that 2*pi*J evaluated on resonance is the
golden-rule decay rate and 2*pi*hbar*J the linewidth in eV.

The free-space part has a closed form and never touches quadrature; the
scattering part above a metal runs one reflected-tensor evaluation per
frequency sample and pair of emitters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    COUPLING_PREFACTOR_EV,
    GREEN_TO_SPECTRAL,
    HBAR_EV_FS,
    NonpositiveFrequency,
    NotPositiveSemidefinite,
    Scenario,
    ShapeMismatch,
    ZeroDiagonal,
    wavenumber_nm,
)
from .greens import free_space_green, halfspace_scattering_green

__all__ = [
    "SpectralDensityGrid",
    "RateAndShiftMatrices",
    "spectral_density",
    "normalized_overlap_matrix",
    "coupling_factor_w",
    "free_space_couplings_g",
    "rate_and_shift_matrices",
]

_COINCIDENT_NM = 1e-9
_TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# grid container with CSV round trip
# ---------------------------------------------------------------------------

@dataclass
class SpectralDensityGrid:
    """Sampled matrix spectral density J_ab(omega) in 1/fs on an energy grid."""

    omegas_ev: np.ndarray        # (n,)
    values: np.ndarray           # (n, M, M), symmetric in the emitter indices
    part: str = "total"          # free_space | scattering | total

    def __post_init__(self):
        self.omegas_ev = np.asarray(self.omegas_ev, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3 or self.values.shape[0] != self.omegas_ev.size \
                or self.values.shape[1] != self.values.shape[2]:
            raise ShapeMismatch(
                f"expected values of shape (n, M, M) matching {self.omegas_ev.size} "
                f"frequency samples, got {self.values.shape}")

    @property
    def n_emitters(self) -> int:
        return self.values.shape[1]

    def to_csv(self, path) -> None:
        """Write the upper triangle as CSV (LF newlines, utf-8, %.11e)."""
        m = self.n_emitters
        cols = [f"J_{a + 1}{b + 1}" for a in range(m) for b in range(a, m)]
        lines = ["omega_eV," + ",".join(cols)]
        for i in range(self.omegas_ev.size):
            vals = [f"{self.omegas_ev[i]:.11e}"]
            vals += [f"{self.values[i, a, b]:.11e}"
                     for a in range(m) for b in range(a, m)]
            lines.append(",".join(vals))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path, part: str = "total") -> "SpectralDensityGrid":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        n_pairs = len(header) - 1
        m = int(round((np.sqrt(8 * n_pairs + 1) - 1) / 2))
        if m * (m + 1) // 2 != n_pairs:
            raise ShapeMismatch(f"{n_pairs} density columns do not fill a triangle")
        omegas = data[:, 0]
        values = np.zeros((omegas.size, m, m))
        col = 1
        for a in range(m):
            for b in range(a, m):
                values[:, a, b] = data[:, col]
                values[:, b, a] = data[:, col]
                col += 1
        return cls(omegas_ev=omegas, values=values, part=part)


@dataclass
class RateAndShiftMatrices:
    """On-resonance decay/coupling matrices (eV) for one scenario.

    ``gamma0``/``v0`` come from the homogeneous tensor alone, the ``total``
    variants include the reflected part, and ``delta_sc`` is the per-emitter
    energy shift induced by the reflected field.  Coherent couplings have a
    zero diagonal by construction.
    """

    gamma0_ev: np.ndarray        # (M, M)
    v0_ev: np.ndarray            # (M, M), zero diagonal
    gamma_total_ev: np.ndarray   # (M, M)
    v_total_ev: np.ndarray       # (M, M), zero diagonal
    delta_sc_ev: np.ndarray      # (M,)


# ---------------------------------------------------------------------------
# closed-form free-space brackets
# ---------------------------------------------------------------------------

def _im_bracket_free(omegas_ev: np.ndarray, rvec: np.ndarray,
                     mu1: np.ndarray, mu2: np.ndarray) -> np.ndarray:
    """mu1 . Im G0 . mu2 in 1/nm for unit dipoles, vectorized over energy."""
    k = wavenumber_nm(omegas_ev)
    dist = float(np.linalg.norm(rvec))
    a12 = float(mu1 @ mu2)
    if dist < _COINCIDENT_NM:
        return (2.0 / 3.0) * a12 * k / (4.0 * np.pi)
    n = rvec / dist
    an = float(mu1 @ n) * float(mu2 @ n)
    x = k * dist
    s1 = np.sinc(x / np.pi)
    # cos x / x^2 - sin x / x^3 loses digits near zero; series below x = 0.05
    x2 = x * x
    series = -1.0 / 3.0 + x2 * (1.0 / 30.0 - x2 * (1.0 / 840.0 - x2 / 45360.0))
    safe = np.where(x < 0.05, 1.0, x)
    direct = np.cos(safe) / safe**2 - np.sin(safe) / safe**3
    s2 = np.where(x < 0.05, series, direct)
    return (k / (4.0 * np.pi)) * ((a12 - an) * s1 + (a12 - 3.0 * an) * s2)


def _pair_density_free(scenario: Scenario, a: int, b: int,
                       omegas_ev: np.ndarray) -> np.ndarray:
    em_a = scenario.emitters[a]
    em_b = scenario.emitters[b]
    rvec = em_a.position - em_b.position
    bracket = _im_bracket_free(omegas_ev, rvec, em_a.dipole_unit, em_b.dipole_unit)
    scale = GREEN_TO_SPECTRAL * em_a.dipole_magnitude_debye * em_b.dipole_magnitude_debye
    return scale * omegas_ev**2 * bracket


def _pair_density_scattering(scenario: Scenario, a: int, b: int,
                             omegas_ev: np.ndarray, rtol: float,
                             max_panels: int, min_subdiv: int) -> np.ndarray:
    em_a = scenario.emitters[a]
    em_b = scenario.emitters[b]
    mu_a = em_a.dipole_unit
    mu_b = em_b.dipole_unit
    out = np.empty(omegas_ev.size)
    for i, energy in enumerate(omegas_ev):
        g = halfspace_scattering_green(em_a.position, em_b.position, float(energy),
                                       scenario.environment, rtol=rtol,
                                       max_panels=max_panels, min_subdiv=min_subdiv)
        out[i] = mu_a @ g.value.imag @ mu_b
    scale = GREEN_TO_SPECTRAL * em_a.dipole_magnitude_debye * em_b.dipole_magnitude_debye
    return scale * omegas_ev**2 * out


def spectral_density(scenario: Scenario, omegas_ev, part: str = "total",
                     rtol: float = 1e-8, max_panels: int = 4000,
                     min_subdiv: int = 1) -> SpectralDensityGrid:
    """Matrix spectral density sampled on an energy grid (eV in, 1/fs out).

    ``part`` selects the homogeneous contribution ("free_space"), the
    reflected one ("scattering", identically zero in free space), or their
    sum ("total").  All sample energies must be positive.
    """
    if part not in ("free_space", "scattering", "total"):
        raise ValueError(f"unknown spectral density part {part!r}")
    omegas = np.atleast_1d(np.asarray(omegas_ev, dtype=float))
    if np.any(omegas <= 0.0):
        raise NonpositiveFrequency("spectral density samples require energy > 0")
    m = scenario.n_emitters
    values = np.zeros((omegas.size, m, m))
    for a in range(m):
        for b in range(a, m):
            acc = np.zeros(omegas.size)
            if part in ("free_space", "total"):
                acc = acc + _pair_density_free(scenario, a, b, omegas)
            if part in ("scattering", "total") and not scenario.environment.is_free_space:
                acc = acc + _pair_density_scattering(scenario, a, b, omegas,
                                                     rtol, max_panels, min_subdiv)
            values[:, a, b] = acc
            values[:, b, a] = acc
    return SpectralDensityGrid(omegas_ev=omegas, values=values, part=part)


# ---------------------------------------------------------------------------
# overlap factorization
# ---------------------------------------------------------------------------

def normalized_overlap_matrix(j_matrix: np.ndarray) -> np.ndarray:
    """S_ab = J_ab / sqrt(J_aa J_bb).  Raises ZeroDiagonal when undefined."""
    j = np.asarray(j_matrix, dtype=float)
    if j.ndim != 2 or j.shape[0] != j.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {j.shape}")
    d = np.diag(j)
    if np.any(d <= 0.0):
        raise ZeroDiagonal("overlap normalization requires positive diagonal entries")
    return j / np.sqrt(np.outer(d, d))


def coupling_factor_w(s_matrix: np.ndarray) -> np.ndarray:
    """Principal symmetric square root of the normalized overlap matrix.

    Eigenvalues in [-1e-10, 0) are clamped to zero; anything more negative
    raises NotPositiveSemidefinite.
    """
    s = np.asarray(s_matrix, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {s.shape}")
    evals, evecs = np.linalg.eigh(0.5 * (s + s.T))
    floor = -1e-10 * max(1.0, float(evals.max(initial=0.0)))
    if evals.min() < floor:
        raise NotPositiveSemidefinite(
            f"overlap matrix has eigenvalue {evals.min():.3e} below tolerance")
    evals = np.clip(evals, 0.0, None)
    return (evecs * np.sqrt(evals)) @ evecs.T


def free_space_couplings_g(scenario: Scenario, omegas_ev) -> np.ndarray:
    """Continuum coupling amplitudes g_al(omega), shape (n, M, M).

    Defined as sqrt(J0_aa(omega)) W_al(omega) for omega > 0 and zero
    otherwise, so that sum_l g_al g_bl reconstructs J0_ab.
    """
    omegas = np.atleast_1d(np.asarray(omegas_ev, dtype=float))
    m = scenario.n_emitters
    out = np.zeros((omegas.size, m, m))
    pos = omegas > 0.0
    if not np.any(pos):
        return out
    wpos = omegas[pos]
    j0 = np.zeros((wpos.size, m, m))
    for a in range(m):
        for b in range(a, m):
            val = _pair_density_free(scenario, a, b, wpos)
            j0[:, a, b] = val
            j0[:, b, a] = val
    diag = np.einsum("naa->na", j0)
    s = j0 / np.sqrt(diag[:, :, None] * diag[:, None, :])
    evals, evecs = np.linalg.eigh(s)
    evals = np.clip(evals, 0.0, None)
    w = np.einsum("nij,nj,nkj->nik", evecs, np.sqrt(evals), evecs)
    out[pos] = np.sqrt(diag)[:, :, None] * w
    return out


# ---------------------------------------------------------------------------
# on-resonance rate and shift matrices
# ---------------------------------------------------------------------------

def rate_and_shift_matrices(scenario: Scenario, rtol: float = 1e-8,
                            max_panels: int = 4000) -> RateAndShiftMatrices:
    """Pairwise decay and coherent-coupling matrices in eV.

    Cross terms are evaluated at the arithmetic mean of the two transition
    energies; the reflected-field self shift at each emitter's own energy.
    """
    m = scenario.n_emitters
    env = scenario.environment
    gamma0 = np.zeros((m, m))
    v0 = np.zeros((m, m))
    gamma_t = np.zeros((m, m))
    v_t = np.zeros((m, m))
    delta = np.zeros(m)
    for a in range(m):
        for b in range(a, m):
            em_a = scenario.emitters[a]
            em_b = scenario.emitters[b]
            ebar = scenario.mean_energy_ev(a, b)
            dip_scale = em_a.dipole_magnitude_debye * em_b.dipole_magnitude_debye
            rvec = em_a.position - em_b.position
            br_im = float(_im_bracket_free(np.array([ebar]), rvec,
                                           em_a.dipole_unit, em_b.dipole_unit)[0])
            g_rate = _TWO_PI * HBAR_EV_FS * GREEN_TO_SPECTRAL * ebar**2 * dip_scale * br_im
            gamma0[a, b] = gamma0[b, a] = g_rate
            if a != b:
                g0 = free_space_green(em_a.position, em_b.position, ebar)
                br_re = float(em_a.dipole_unit @ g0.value.real @ em_b.dipole_unit)
                val = -COUPLING_PREFACTOR_EV * ebar**2 * dip_scale * br_re
                v0[a, b] = v0[b, a] = val
            if env.is_free_space:
                continue
            gsc = halfspace_scattering_green(em_a.position, em_b.position, ebar,
                                             env, rtol=rtol, max_panels=max_panels)
            br_sc_im = float(em_a.dipole_unit @ gsc.value.imag @ em_b.dipole_unit)
            extra = _TWO_PI * HBAR_EV_FS * GREEN_TO_SPECTRAL * ebar**2 * dip_scale * br_sc_im
            gamma_t[a, b] = gamma_t[b, a] = gamma0[a, b] + extra
            if a != b:
                br_sc_re = float(em_a.dipole_unit @ gsc.value.real @ em_b.dipole_unit)
                val = v0[a, b] - COUPLING_PREFACTOR_EV * ebar**2 * dip_scale * br_sc_re
                v_t[a, b] = v_t[b, a] = val
    if env.is_free_space:
        gamma_t = gamma0.copy()
        v_t = v0.copy()
    else:
        for a in range(m):
            em = scenario.emitters[a]
            gsc = halfspace_scattering_green(em.position, em.position, em.energy_ev,
                                             env, rtol=rtol, max_panels=max_panels)
            br = float(em.dipole_unit @ gsc.value.real @ em.dipole_unit)
            delta[a] = -COUPLING_PREFACTOR_EV * em.energy_ev**2 \
                * em.dipole_magnitude_debye**2 * br
    return RateAndShiftMatrices(gamma0_ev=gamma0, v0_ev=v0, gamma_total_ev=gamma_t,
                                v_total_ev=v_t, delta_sc_ev=delta)
