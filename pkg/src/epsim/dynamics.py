"""Population dynamics of emitters coupled to discrete modes or a continuum.

Four propagation routes share this module: two Lindblad models on a truncated
excitation ladder (discrete lossy modes, with or without explicit free-space
dipole coupling terms), a non-Markovian amplitude solver driven by memory
kernels built from a sampled spectral density, and a Markovian density-matrix
reference over the emitters alone.

Time is measured in fs, operators in eV; the Lindblad integrator is classical
fixed-step RK4, the amplitude solver a trapezoidal predictor-corrector.  Both
live in the kernel lanes (numpy or numba, see ``_kernels``).

Rotating frames: the Lindblad routes rotate at the mean emitter energy, which
leaves populations untouched while keeping all phases slow.  The non-RWA
variant of the discrete-mode models cannot (excitation number is not
conserved), so it runs in the lab frame on a two-excitation ladder and needs
a finer step for the same accuracy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    COUPLING_PREFACTOR_EV,
    GridMismatch,
    HBAR_EV_FS,
    KernelGridTooCoarse,
    NonDegenerateEmitters,
    NonPhysicalState,
    Scenario,
    ShapeMismatch,
    StepSizeTooLarge,
)
from .greens import free_space_green
from .modefit import EffectiveModeSet
from .spectral import RateAndShiftMatrices, SpectralDensityGrid, spectral_density

__all__ = [
    "SingleExcitationSpace",
    "PopulationTrace",
    "TraceMetric",
    "time_grid",
    "lindblad_rhs",
    "compare_traces",
    "propagate_cqed_ddi",
    "propagate_cqed",
    "propagate_mqed_wf",
    "propagate_mqed_dmma",
]


def time_grid(t_max_fs: float, dt_fs: float) -> np.ndarray:
    """Uniform time samples 0..t_max inclusive."""
    if t_max_fs <= 0 or dt_fs <= 0:
        raise ValueError("time grid needs positive span and step")
    n = int(round(t_max_fs / dt_fs))
    return np.arange(n + 1) * dt_fs


def _check_uniform(t_grid) -> tuple[float, int]:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("time grid must be a 1-d array with at least two samples")
    if abs(t[0]) > 1e-12:
        raise ValueError("time grid must start at 0")
    dt = t[1] - t[0]
    if dt <= 0 or np.max(np.abs(np.diff(t) - dt)) > 1e-9 * dt:
        raise ValueError("time grid must be uniform and increasing")
    return float(dt), t.size - 1


# ---------------------------------------------------------------------------
# truncated excitation ladder
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingleExcitationSpace:
    """Basis of at most ``max_excitation`` quanta over emitters and modes.

    At the default truncation the basis is exactly [ground, one emitter
    excited, one photon in one mode] with dimension 1 + N + M, closed under
    excitation-conserving dynamics with vacuum baths.  ``max_excitation=2``
    extends the ladder for counter-rotating couplings.
    """

    n_emitters: int
    n_modes: int
    max_excitation: int
    states: tuple    # ((emitters...), (photons...)) with sorted index tuples

    @classmethod
    def build(cls, n_emitters: int, n_modes: int,
              max_excitation: int = 1) -> "SingleExcitationSpace":
        states = [((), ())]
        for n_exc in range(1, max_excitation + 1):
            for k_em in range(min(n_exc, n_emitters), -1, -1):
                k_ph = n_exc - k_em
                for ems in itertools.combinations(range(n_emitters), k_em):
                    for phs in itertools.combinations_with_replacement(range(n_modes), k_ph):
                        states.append((ems, phs))
        return cls(n_emitters=n_emitters, n_modes=n_modes,
                   max_excitation=max_excitation, states=tuple(states))

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, emitters=(), photons=()) -> int:
        key = (tuple(sorted(emitters)), tuple(sorted(photons)))
        try:
            return self.states.index(key)
        except ValueError:
            raise KeyError(f"state {key} outside the truncated ladder") from None

    def labels(self) -> list:
        out = []
        for ems, phs in self.states:
            if not ems and not phs:
                out.append("G")
            else:
                bits = [f"E{a + 1}" for a in ems] + [f"P{j + 1}" for j in phs]
                out.append("+".join(bits))
        return out

    def sigma_minus(self, alpha: int) -> np.ndarray:
        op = np.zeros((self.dim, self.dim))
        lut = {s: i for i, s in enumerate(self.states)}
        for i, (ems, phs) in enumerate(self.states):
            if alpha in ems:
                tgt = (tuple(x for x in ems if x != alpha), phs)
                op[lut[tgt], i] = 1.0
        return op

    def annihilation(self, mode: int) -> np.ndarray:
        op = np.zeros((self.dim, self.dim))
        lut = {s: i for i, s in enumerate(self.states)}
        for i, (ems, phs) in enumerate(self.states):
            cnt = phs.count(mode)
            if cnt:
                rem = list(phs)
                rem.remove(mode)
                tgt = (ems, tuple(rem))
                op[lut[tgt], i] = math.sqrt(cnt)
        return op


# ---------------------------------------------------------------------------
# trace container
# ---------------------------------------------------------------------------

@dataclass
class PopulationTrace:
    """Time-resolved populations: per-emitter, per-mode, and ground/rest.

    For amplitude-based propagation the mode block is empty and the ground
    column carries the bookkeeping remainder 1 - sum of emitter populations
    (decay goes into a continuum that is not tracked state by state).
    """

    times_fs: np.ndarray         # (n,)
    emitter_pops: np.ndarray     # (n, N)
    photon_pops: np.ndarray      # (n, M)
    ground_pop: np.ndarray       # (n,)
    method: str = ""
    scenario_hash: str = ""

    def __post_init__(self):
        self.times_fs = np.asarray(self.times_fs, dtype=float)
        self.emitter_pops = np.asarray(self.emitter_pops, dtype=float)
        self.photon_pops = np.asarray(self.photon_pops, dtype=float)
        self.ground_pop = np.asarray(self.ground_pop, dtype=float)
        n = self.times_fs.size
        if self.emitter_pops.shape[0] != n or self.ground_pop.shape[0] != n \
                or self.photon_pops.shape[0] != n:
            raise ShapeMismatch("population arrays must share the time axis")

    @property
    def n_emitters(self) -> int:
        return self.emitter_pops.shape[1]

    @property
    def n_modes(self) -> int:
        return self.photon_pops.shape[1]

    def to_csv(self, path) -> None:
        cols = [f"P_E{a + 1}" for a in range(self.n_emitters)]
        cols += [f"P_ph{j + 1}" for j in range(self.n_modes)]
        cols.append("P_ground")
        lines = ["t_fs," + ",".join(cols)]
        for i in range(self.times_fs.size):
            vals = [f"{self.times_fs[i]:.6f}"]
            vals += [f"{x:.11e}" for x in self.emitter_pops[i]]
            vals += [f"{x:.11e}" for x in self.photon_pops[i]]
            vals.append(f"{self.ground_pop[i]:.11e}")
            lines.append(",".join(vals))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path, method: str = "") -> "PopulationTrace":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        n_em = sum(1 for h in header if h.startswith("P_E"))
        n_ph = sum(1 for h in header if h.startswith("P_ph"))
        return cls(times_fs=data[:, 0], emitter_pops=data[:, 1:1 + n_em],
                   photon_pops=data[:, 1 + n_em:1 + n_em + n_ph],
                   ground_pop=data[:, 1 + n_em + n_ph], method=method)


@dataclass
class TraceMetric:
    """Per-emitter deviation between two traces on a shared grid."""

    emitter: int                 # 1-based
    max_abs_diff: float
    t_at_max_fs: float
    l2: float                    # root mean square over samples


def compare_traces(a: PopulationTrace, b: PopulationTrace) -> list:
    """Max deviation, its time, and RMS per emitter.  Grids must match."""
    if a.times_fs.shape != b.times_fs.shape \
            or np.max(np.abs(a.times_fs - b.times_fs)) > 1e-9:
        raise GridMismatch("traces sample different time grids")
    if a.n_emitters != b.n_emitters:
        raise GridMismatch("traces track different emitter counts")
    out = []
    for idx in range(a.n_emitters):
        diff = a.emitter_pops[:, idx] - b.emitter_pops[:, idx]
        k = int(np.argmax(np.abs(diff)))
        out.append(TraceMetric(emitter=idx + 1,
                               max_abs_diff=float(abs(diff[k])),
                               t_at_max_fs=float(a.times_fs[k]),
                               l2=float(np.sqrt(np.mean(diff * diff)))))
    return out


# ---------------------------------------------------------------------------
# generic Lindblad right-hand side (reference form, used by tests and docs)
# ---------------------------------------------------------------------------

def lindblad_rhs(rho: np.ndarray, hamiltonian_ev: np.ndarray,
                 dissipators=()) -> np.ndarray:
    """d(rho)/dt in 1/fs for a Hamiltonian (eV) plus matrix-rate dissipators.

    ``dissipators`` is an iterable of (rate_matrix_ev, operators) pairs; each
    contributes sum_ij R_ij (L_j rho L_i^+ - 1/2 {L_i^+ L_j, rho}) / hbar.
    A scalar-rate loss channel is the 1x1 special case.  Hermiticity of the
    output is enforced against floating-point drift.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    h = np.asarray(hamiltonian_ev, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ShapeMismatch(f"state must be a square matrix, got {rho.shape}")
    if h.shape != rho.shape:
        raise ShapeMismatch(f"Hamiltonian shape {h.shape} does not match state {rho.shape}")
    out = (-1j / HBAR_EV_FS) * (h @ rho - rho @ h)
    for rates, ops in dissipators:
        rates = np.asarray(rates, dtype=float)
        ops = [np.asarray(op, dtype=np.complex128) for op in ops]
        if rates.ndim != 2 or rates.shape[0] != rates.shape[1] \
                or rates.shape[0] != len(ops):
            raise ShapeMismatch("rate matrix must be square with one row per operator")
        if any(op.shape != rho.shape for op in ops):
            raise ShapeMismatch("dissipator operators must match the state dimension")
        for i in range(len(ops)):
            for j in range(len(ops)):
                r = rates[i, j] / HBAR_EV_FS
                if r == 0.0:
                    continue
                li_dag = ops[i].conj().T
                anti = li_dag @ ops[j]
                out += r * (ops[j] @ rho @ li_dag
                            - 0.5 * (anti @ rho + rho @ anti))
    return 0.5 * (out + out.conj().T)


# ---------------------------------------------------------------------------
# packed Lindblad driver
# ---------------------------------------------------------------------------

def _run_lindblad(space: SingleExcitationSpace, h_ev: np.ndarray,
                  emitter_rates_ev: np.ndarray | None,
                  mode_rates_ev: np.ndarray | None,
                  rho0: np.ndarray, t_grid, method: str, scenario_hash: str,
                  local_tol: float, check_every: int) -> PopulationTrace:
    dt, n_steps = _check_uniform(t_grid)
    d = space.dim
    sms = [space.sigma_minus(a) for a in range(space.n_emitters)]
    ams = [space.annihilation(j) for j in range(space.n_modes)]
    h_nh = h_ev.astype(np.complex128) / HBAR_EV_FS
    jumps_l = []
    jumps_r = []
    if emitter_rates_ev is not None and np.any(emitter_rates_ev):
        g_fs = np.asarray(emitter_rates_ev, dtype=float) / HBAR_EV_FS
        drain = np.zeros((d, d), dtype=np.complex128)
        for a in range(space.n_emitters):
            for b in range(space.n_emitters):
                if g_fs[a, b] != 0.0:
                    drain += g_fs[a, b] * (sms[a].T @ sms[b])
        h_nh = h_nh - 0.5j * drain
        for b in range(space.n_emitters):
            col = g_fs[:, b]
            if not np.any(col):
                continue
            right = np.zeros((d, d), dtype=np.complex128)
            for a in range(space.n_emitters):
                if col[a] != 0.0:
                    right += col[a] * sms[a].T
            jumps_l.append(sms[b].astype(np.complex128))
            jumps_r.append(right)
    if mode_rates_ev is not None:
        for j, kap in enumerate(np.asarray(mode_rates_ev, dtype=float)):
            if kap == 0.0:
                continue
            k_fs = kap / HBAR_EV_FS
            h_nh = h_nh - 0.5j * k_fs * (ams[j].T @ ams[j])
            jumps_l.append(math.sqrt(k_fs) * ams[j].astype(np.complex128))
            jumps_r.append(math.sqrt(k_fs) * ams[j].T.astype(np.complex128))
    if jumps_l:
        jl = np.ascontiguousarray(np.stack(jumps_l))
        jr = np.ascontiguousarray(np.stack(jumps_r))
    else:
        jl = np.zeros((1, d, d), dtype=np.complex128)
        jr = np.zeros((1, d, d), dtype=np.complex128)
    traj, status, step = _kernels.rk4_lindblad_propagate(
        np.ascontiguousarray(h_nh), jl, jr, np.ascontiguousarray(rho0),
        dt, n_steps, 1, check_every, local_tol, 1e-8, 1e-6)
    if status == 1:
        raise StepSizeTooLarge(
            f"RK4 local error above {local_tol:g} at step {step} (t = {step * dt:.3f} fs); "
            f"reduce dt")
    if status == 2:
        raise NonPhysicalState(
            f"state left physical bounds at step {step} (t = {step * dt:.3f} fs)")
    pops = np.real(np.einsum("tii->ti", traj))
    n_t = traj.shape[0]
    em = np.zeros((n_t, space.n_emitters))
    ph = np.zeros((n_t, space.n_modes))
    for i, (ems, phs) in enumerate(space.states):
        for a in ems:
            em[:, a] += pops[:, i]
        for j in phs:
            ph[:, j] += pops[:, i]
    ground = pops[:, 0]
    return PopulationTrace(times_fs=np.asarray(t_grid, dtype=float),
                           emitter_pops=em, photon_pops=ph, ground_pop=ground,
                           method=method, scenario_hash=scenario_hash)


def _mode_hamiltonian(space: SingleExcitationSpace, scenario: Scenario,
                      modeset: EffectiveModeSet, v_ev: np.ndarray | None,
                      rwa: bool, energy_shift_ev: np.ndarray | None = None) -> np.ndarray:
    n_em = scenario.n_emitters
    energies = np.array(scenario.energies_ev)
    if energy_shift_ev is not None:
        energies = energies + energy_shift_ev
    omegas_ph = modeset.omegas
    w_ref = float(np.mean(energies)) if rwa else 0.0
    sms = [space.sigma_minus(a) for a in range(n_em)]
    ams = [space.annihilation(j) for j in range(space.n_modes)]
    h = np.zeros((space.dim, space.dim))
    for a in range(n_em):
        h += (energies[a] - w_ref) * (sms[a].T @ sms[a])
    for j in range(space.n_modes):
        h += (omegas_ph[j] - w_ref) * (ams[j].T @ ams[j])
    amp = modeset.amplitudes
    for a in range(n_em):
        for j in range(space.n_modes):
            if amp[a, j] == 0.0:
                continue
            h += amp[a, j] * (sms[a].T @ ams[j] + ams[j].T @ sms[a])
            if not rwa:
                h += amp[a, j] * (sms[a].T @ ams[j].T + ams[j] @ sms[a])
    if v_ev is not None:
        for a in range(n_em):
            for b in range(n_em):
                if a != b and v_ev[a, b] != 0.0:
                    h += 0.5 * v_ev[a, b] * (sms[a].T @ sms[b] + sms[b].T @ sms[a])
    return h


def _initial_state(space: SingleExcitationSpace, initial_emitter: int) -> np.ndarray:
    rho0 = np.zeros((space.dim, space.dim), dtype=np.complex128)
    idx = space.index(emitters=(initial_emitter,))
    rho0[idx, idx] = 1.0
    return rho0


def propagate_cqed_ddi(scenario: Scenario, modeset: EffectiveModeSet,
                       rates: RateAndShiftMatrices, t_grid, rwa: bool = True,
                       initial_emitter: int = 0, local_tol: float = 1e-8,
                       check_every: int = 200) -> PopulationTrace:
    """Discrete lossy modes plus explicit free-space dipole terms.

    The emitter block carries the coherent couplings V0 and the matrix decay
    rates Gamma0 of the homogeneous field; the fitted modes stand in for the
    scattered field.  RWA on a single-excitation ladder by default; with
    ``rwa=False`` the ladder is truncated at two quanta in the lab frame (use
    a finer dt there).
    """
    if modeset.n_emitters != scenario.n_emitters:
        raise ShapeMismatch("mode set couples a different number of emitters")
    space = SingleExcitationSpace.build(scenario.n_emitters, modeset.n_modes,
                                        1 if rwa else 2)
    h = _mode_hamiltonian(space, scenario, modeset, rates.v0_ev, rwa)
    return _run_lindblad(space, h, rates.gamma0_ev, modeset.kappas,
                         _initial_state(space, initial_emitter), t_grid,
                         "cqed_ddi", scenario.hash_hex, local_tol, check_every)


def propagate_cqed(scenario: Scenario, modeset: EffectiveModeSet, t_grid,
                   rwa: bool = True, initial_emitter: int = 0,
                   local_tol: float = 1e-8, check_every: int = 200) -> PopulationTrace:
    """Discrete lossy modes only: no direct dipole coupling, no free-space decay.

    The mode set is expected to target the total density, which already
    carries the free-space weight.
    """
    if modeset.n_emitters != scenario.n_emitters:
        raise ShapeMismatch("mode set couples a different number of emitters")
    space = SingleExcitationSpace.build(scenario.n_emitters, modeset.n_modes,
                                        1 if rwa else 2)
    h = _mode_hamiltonian(space, scenario, modeset, None, rwa)
    return _run_lindblad(space, h, None, modeset.kappas,
                         _initial_state(space, initial_emitter), t_grid,
                         "cqed", scenario.hash_hex, local_tol, check_every)


def propagate_mqed_dmma(scenario: Scenario, rates: RateAndShiftMatrices, t_grid,
                        initial_emitter: int = 0, local_tol: float = 1e-8,
                        check_every: int = 200) -> PopulationTrace:
    """Markovian density-matrix reference over the emitters alone.

    Uses the environment-dressed rate matrix, coupling matrix, and the
    per-emitter scattered-field energy shifts; valid in the weak-coupling
    regime only.
    """
    n_em = scenario.n_emitters
    space = SingleExcitationSpace.build(n_em, 0, 1)
    energies = np.array(scenario.energies_ev) + rates.delta_sc_ev
    w_ref = float(np.mean(energies))
    sms = [space.sigma_minus(a) for a in range(n_em)]
    h = np.zeros((space.dim, space.dim))
    for a in range(n_em):
        h += (energies[a] - w_ref) * (sms[a].T @ sms[a])
    for a in range(n_em):
        for b in range(n_em):
            if a != b and rates.v_total_ev[a, b] != 0.0:
                h += 0.5 * rates.v_total_ev[a, b] * (sms[a].T @ sms[b] + sms[b].T @ sms[a])
    return _run_lindblad(space, h, rates.gamma_total_ev, None,
                         _initial_state(space, initial_emitter), t_grid,
                         "mqed_dmma", scenario.hash_hex, local_tol, check_every)


# ---------------------------------------------------------------------------
# non-Markovian amplitude propagation
# ---------------------------------------------------------------------------

def _free_space_markov(scenario: Scenario, w_m: float) -> np.ndarray:
    """Markov-limit generator of the homogeneous field: Gamma0/2 + i V0 / hbar."""
    n_em = scenario.n_emitters
    j0 = spectral_density(scenario, np.array([w_m]), part="free_space").values[0]
    gamma_fs = 2.0 * math.pi * j0
    v_ev = np.zeros((n_em, n_em))
    for a in range(n_em):
        for b in range(a + 1, n_em):
            em_a = scenario.emitters[a]
            em_b = scenario.emitters[b]
            g0 = free_space_green(em_a.position, em_b.position, w_m)
            br = float(em_a.dipole_unit @ g0.value.real @ em_b.dipole_unit)
            val = -COUPLING_PREFACTOR_EV * w_m**2 * em_a.dipole_magnitude_debye \
                * em_b.dipole_magnitude_debye * br
            v_ev[a, b] = v_ev[b, a] = val
    return 0.5 * gamma_fs + 1j * v_ev / HBAR_EV_FS


def _kernel_samples(omegas: np.ndarray, values: np.ndarray, w_m: float,
                    taus: np.ndarray) -> np.ndarray:
    w = np.empty_like(omegas)
    w[0] = 0.5 * (omegas[1] - omegas[0])
    w[-1] = 0.5 * (omegas[-1] - omegas[-2])
    if omegas.size > 2:
        w[1:-1] = 0.5 * (omegas[2:] - omegas[:-2])
    phases = np.exp(-1j * np.outer(taus, omegas - w_m) / HBAR_EV_FS)
    return np.einsum("tg,g,gab->tab", phases, w, values) / HBAR_EV_FS


def _build_kernel(omegas: np.ndarray, values: np.ndarray, shift: float,
                  n_t: int, dt: float) -> np.ndarray:
    """K[n] = (1/hbar) integral dE J(E) exp(-i (E - shift) n dt / hbar)."""
    w = np.empty_like(omegas)
    w[0] = 0.5 * (omegas[1] - omegas[0])
    w[-1] = 0.5 * (omegas[-1] - omegas[-2])
    if omegas.size > 2:
        w[1:-1] = 0.5 * (omegas[2:] - omegas[:-2])
    jw = values * w[:, None, None] / HBAR_EV_FS     # (g, M, M)
    step = np.exp(-1j * (omegas - shift) * dt / HBAR_EV_FS)
    phase = np.ones_like(step)
    m = values.shape[1]
    out = np.empty((n_t, m, m), dtype=np.complex128)
    for n in range(n_t):
        out[n] = np.einsum("g,gab->ab", phase, jw)
        phase = phase * step
    return out


def propagate_mqed_wf(spectral_source, scenario: Scenario, t_grid,
                      counter_rotating: bool = True, initial_emitter: int = 0,
                      markov_free_space: bool = True, kernel_check: bool = True,
                      kernel_check_tol: float = 1e-2, n_omega: int = 2000,
                      window_half_ev: float = 1.5) -> PopulationTrace:
    """Volterra amplitude propagation against a sampled spectral density.

    ``spectral_source`` is a SpectralDensityGrid or a callable mapping an
    energy grid (eV) to density samples (n, M, M) in 1/fs.  Requires
    degenerate emitters.  With ``markov_free_space`` on (default) the
    homogeneous part of the density is handled exactly in its flat-continuum
    Markov limit (decay matrix plus dipole coupling), and only the remainder
    enters the finite-window memory kernel: a frequency window can never
    reproduce the static dipole interaction, whose spectral weight sits far
    outside any practical grid.  Grids tagged part="total" have the closed
    form homogeneous density subtracted first; "scattering" grids are used as
    they are.  With the flag off the sampled density is kernelized verbatim
    and no Markov terms are added.

    The (t + t') counter-rotating kernels are included by default; switch
    ``counter_rotating`` off for excitation-conserving propagation.
    """
    if not scenario.is_degenerate:
        raise NonDegenerateEmitters(
            "amplitude propagation assumes one shared transition energy")
    w_m = scenario.degenerate_energy_ev
    n_em = scenario.n_emitters
    dt, n_steps = _check_uniform(t_grid)
    n_t = n_steps + 1

    refine_source = None
    if isinstance(spectral_source, SpectralDensityGrid):
        omegas = spectral_source.omegas_ev.copy()
        values = spectral_source.values.copy()
        part = spectral_source.part
    elif callable(spectral_source):
        lo = max(w_m - window_half_ev, 1e-6)
        hi = w_m + window_half_ev
        omegas = np.linspace(lo, hi, n_omega)
        values = np.asarray(spectral_source(omegas), dtype=float)
        part = "total"
        refine_source = spectral_source
    else:
        raise TypeError("spectral_source must be a SpectralDensityGrid or callable")
    if values.shape != (omegas.size, n_em, n_em):
        raise ShapeMismatch(
            f"spectral source shape {values.shape} does not match "
            f"{n_em} emitters on {omegas.size} samples")
    if omegas.size < 8:
        raise KernelGridTooCoarse("need at least 8 frequency samples")

    if markov_free_space:
        markov = _free_space_markov(scenario, w_m)
        if part == "total":
            j0 = spectral_density(scenario, omegas, part="free_space").values
            values = values - j0
        elif part == "free_space":
            values = np.zeros_like(values)
    else:
        markov = np.zeros((n_em, n_em), dtype=np.complex128)

    if kernel_check:
        taus = np.linspace(0.0, n_steps * dt, 48)
        kf = _kernel_samples(omegas, values, w_m, taus)
        if refine_source is not None:
            om2 = np.linspace(omegas[0], omegas[-1], 2 * omegas.size - 1)
            v2 = np.asarray(refine_source(om2), dtype=float)
            if markov_free_space:
                v2 = v2 - spectral_density(scenario, om2, part="free_space").values
            kd = _kernel_samples(om2, v2, w_m, taus)
        else:
            kd = _kernel_samples(omegas[::2], values[::2], w_m, taus)
        scale = max(float(np.max(np.abs(kf))), 1e-300)
        err = float(np.max(np.abs(kf - kd)))
        if err > kernel_check_tol * scale:
            raise KernelGridTooCoarse(
                f"memory kernel changes by {err / scale:.2e} of its peak under "
                f"grid refinement (tolerance {kernel_check_tol:g})")

    kres = _build_kernel(omegas, values, w_m, n_t, dt)
    if counter_rotating:
        kcr = _build_kernel(omegas, values, -w_m, 2 * n_t - 1, dt)
    else:
        kcr = np.zeros((1, n_em, n_em), dtype=np.complex128)
    c0 = np.zeros(n_em, dtype=np.complex128)
    c0[initial_emitter] = 1.0
    amps = _kernels.volterra_propagate(
        np.ascontiguousarray(kres), np.ascontiguousarray(kcr),
        np.ascontiguousarray(markov), c0, dt, counter_rotating)
    pops = np.abs(amps) ** 2
    ground = 1.0 - pops.sum(axis=1)
    return PopulationTrace(times_fs=np.asarray(t_grid, dtype=float),
                           emitter_pops=pops,
                           photon_pops=np.zeros((n_t, 0)),
                           ground_pop=ground, method="mqed_wf",
                           scenario_hash=scenario.hash_hex)
