"""Discrete lossy-mode representation of a spectral density.

A mode set is the parameter block of the few-mode cavity model: mode energies
hbar*omega_j, widths hbar*kappa_j and real coupling amplitudes hbar*Omega_aj,
all in eV.  Its induced density is the matrix Lorentzian sum

    J_ab(omega) = (1/hbar) sum_j Omega_aj Omega_bj (kappa_j/2/pi)
                  / ((omega - omega_j)^2 + (kappa_j/2)^2)

in 1/fs, which matches SpectralDensityGrid units (multiply by hbar for eV).
The fitter runs a staged protocol: peak-picking initialization, a separable
stage that optimizes only (omega_j, kappa_j) with the mode weights solved
linearly, a full trust-region polish with analytic Jacobian, and seeded
restarts.  Sign flips of a coupling column leave the model invariant, so
reported parameters use the gauge that makes the first nonzero entry of each
column nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares

from .core import (
    FitDidNotConverge,
    HBAR_EV_FS,
    Scenario,
    ShapeMismatch,
)
from .spectral import SpectralDensityGrid, spectral_density

__all__ = [
    "EffectiveModeSet",
    "lorentzian_model",
    "resolvent_density",
    "effective_total_density",
    "fit_modes",
    "FitReport",
    "fit_report",
    "write_mode_file",
    "read_mode_file",
]


@dataclass(frozen=True)
class EffectiveModeSet:
    """Parameters of the discrete lossy-mode model (all energies in eV).

    ``couplings_ev`` has one row per emitter and one column per mode.  Widths
    must be nonnegative; zero is allowed so that lossless test cases can be
    expressed, though the fitter itself keeps them strictly positive.
    """

    mode_energies_ev: tuple
    mode_widths_ev: tuple
    couplings_ev: tuple          # tuple of per-emitter tuples
    target_part: str = "scattering"
    fit_rms: float = 0.0
    converged: bool = True

    def __post_init__(self):
        ome = tuple(float(x) for x in self.mode_energies_ev)
        kap = tuple(float(x) for x in self.mode_widths_ev)
        cpl = tuple(tuple(float(x) for x in row) for row in self.couplings_ev)
        object.__setattr__(self, "mode_energies_ev", ome)
        object.__setattr__(self, "mode_widths_ev", kap)
        object.__setattr__(self, "couplings_ev", cpl)
        n = len(ome)
        if len(kap) != n:
            raise ShapeMismatch(f"{len(kap)} widths for {n} mode energies")
        if any(len(row) != n for row in cpl):
            raise ShapeMismatch("coupling rows must have one entry per mode")
        if any(k < 0.0 for k in kap):
            raise ValueError("mode widths must be nonnegative")
        if self.target_part not in ("scattering", "total"):
            raise ValueError(f"unknown target part {self.target_part!r}")

    @property
    def n_modes(self) -> int:
        return len(self.mode_energies_ev)

    @property
    def n_emitters(self) -> int:
        return len(self.couplings_ev)

    @property
    def omegas(self) -> np.ndarray:
        return np.array(self.mode_energies_ev)

    @property
    def kappas(self) -> np.ndarray:
        return np.array(self.mode_widths_ev)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array(self.couplings_ev)


def _lorentz_basis(omegas_ev: np.ndarray, ome: np.ndarray, kap: np.ndarray) -> np.ndarray:
    """Unit-area Lorentzian line shapes, shape (n_grid, n_modes), 1/eV."""
    diff = omegas_ev[:, None] - ome[None, :]
    half = 0.5 * kap[None, :]
    return (half / math.pi) / (diff * diff + half * half)


def lorentzian_model(modeset: EffectiveModeSet, omegas_ev) -> SpectralDensityGrid:
    """Evaluate the mode set's spectral density on a grid (1/fs)."""
    omegas = np.atleast_1d(np.asarray(omegas_ev, dtype=float))
    basis = _lorentz_basis(omegas, modeset.omegas, modeset.kappas)
    amp = modeset.amplitudes                             # (N, n_modes)
    weights = np.einsum("aj,bj->jab", amp, amp)          # (n_modes, N, N)
    values = np.einsum("kj,jab->kab", basis, weights) / HBAR_EV_FS
    return SpectralDensityGrid(omegas_ev=omegas, values=values, part=modeset.target_part)


def resolvent_density(modeset: EffectiveModeSet, omegas_ev) -> SpectralDensityGrid:
    """Same density through the matrix resolvent Im[A (H_eff - w)^(-1) A^T]/pi.

    H_eff is diagonal with entries omega_j - i kappa_j / 2.  Kept as an
    independent evaluation route; tests pin it against lorentzian_model.
    """
    omegas = np.atleast_1d(np.asarray(omegas_ev, dtype=float))
    amp = modeset.amplitudes
    poles = modeset.omegas - 0.5j * modeset.kappas       # (n_modes,)
    denom = poles[None, :] - omegas[:, None]             # (n_grid, n_modes)
    res = np.einsum("aj,kj,bj->kab", amp, 1.0 / denom, amp)
    values = res.imag / (math.pi * HBAR_EV_FS)
    return SpectralDensityGrid(omegas_ev=omegas, values=values, part=modeset.target_part)


def effective_total_density(modeset: EffectiveModeSet, scenario: Scenario,
                            omegas_ev) -> SpectralDensityGrid:
    """Closed-form homogeneous density plus the mode-set Lorentzians.

    The discrete modes stand in for the scattered field, so the sum plays the
    role of a total density and is tagged as such.
    """
    omegas = np.atleast_1d(np.asarray(omegas_ev, dtype=float))
    free = spectral_density(scenario, omegas, part="free_space")
    modes = lorentzian_model(modeset, omegas)
    if free.values.shape != modes.values.shape:
        raise ShapeMismatch(
            f"scenario has {scenario.n_emitters} emitters but the mode set "
            f"couples {modeset.n_emitters}")
    return SpectralDensityGrid(omegas_ev=omegas, values=free.values + modes.values,
                               part="total")


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def _pack(ome, kap, amp):
    return np.concatenate([ome, kap, amp.ravel()])


def _unpack(x, n_modes, n_em):
    ome = x[:n_modes]
    kap = x[n_modes:2 * n_modes]
    amp = x[2 * n_modes:].reshape(n_em, n_modes)
    return ome, kap, amp


def _model_triangle(omegas, ome, kap, amp, rows, cols):
    basis = _lorentz_basis(omegas, ome, kap)                      # (k, j)
    pair = amp[rows][:, :] * amp[cols][:, :]                      # (p, j)
    return (basis @ pair.T) / HBAR_EV_FS                          # (k, p)


def _residual_and_jac(x, omegas, target_tri, sqw, rows, cols, n_modes, n_em,
                      want_jac):
    ome, kap, amp = _unpack(x, n_modes, n_em)
    diff = omegas[:, None] - ome[None, :]
    half = 0.5 * kap[None, :]
    denom = diff * diff + half * half
    basis = (half / math.pi) / denom                              # (k, j)
    pair = amp[rows] * amp[cols]                                  # (p, j)
    model = (basis @ pair.T) / HBAR_EV_FS
    res = ((model - target_tri) * sqw[None, :]).ravel()
    if not want_jac:
        return res, None
    n_k = omegas.size
    n_p = rows.size
    jac = np.zeros((n_k * n_p, x.size))
    dl_dome = basis * 2.0 * diff / denom                          # (k, j)
    dl_dkap = ((diff * diff - half * half) / (2.0 * math.pi)) / (denom * denom)
    for j in range(n_modes):
        blk_o = np.outer(dl_dome[:, j], pair[:, j] * sqw) / HBAR_EV_FS
        blk_k = np.outer(dl_dkap[:, j], pair[:, j] * sqw) / HBAR_EV_FS
        jac[:, j] = blk_o.ravel()
        jac[:, n_modes + j] = blk_k.ravel()
    # d model_p / d amp[g, j] = (amp[cols_p, j] [g == rows_p] + amp[rows_p, j] [g == cols_p]) L_j
    for g in range(n_em):
        sel_r = (rows == g).astype(float)
        sel_c = (cols == g).astype(float)
        for j in range(n_modes):
            coef = (sel_r * amp[cols, j] + sel_c * amp[rows, j]) * sqw
            jac[:, 2 * n_modes + g * n_modes + j] = \
                np.outer(basis[:, j], coef).ravel() / HBAR_EV_FS
    return res, jac


def _rms_from_cost(cost, n_k, n_em):
    # cost = 0.5 sum r^2; weighted triangle sum equals the full-matrix sum
    return math.sqrt(2.0 * cost / (n_k * n_em * n_em))


def _canonical_gauge(amp: np.ndarray) -> np.ndarray:
    amp = amp.copy()
    for j in range(amp.shape[1]):
        col = amp[:, j]
        nz = np.flatnonzero(col != 0.0)
        if nz.size and col[nz[0]] < 0.0:
            amp[:, j] = -col
    return amp


def _inner_solve(basis, wt):
    # ridge-regularized normal equations: coincident line shapes otherwise
    # blow up the relaxed weights through near-cancellation; the bias this
    # introduces is removed by the full polish afterwards
    gram = basis.T @ basis
    lam = 1e-4 * np.trace(gram) / max(gram.shape[0], 1)
    return np.linalg.solve(gram + lam * np.eye(gram.shape[0]), basis.T @ wt)


def _separable_stage(omegas, target_tri, sqw, rows, cols, n_modes, n_em,
                     ome0, kap0, bounds_ok):
    """Optimize mode positions and widths with weights solved linearly.

    The per-pair weights P_abj enter the model linearly, so for fixed
    (omega_j, kappa_j) the optimal symmetric weights come from one least
    squares per matrix element.  The relaxation ignores the rank-1 structure;
    the full polish restores it.
    """
    wt = target_tri * sqw[None, :]

    def lifted(y):
        ome = y[:n_modes]
        kap = np.exp(y[n_modes:])
        basis = _lorentz_basis(omegas, ome, kap) / HBAR_EV_FS
        sol = _inner_solve(basis, wt)
        return (basis @ sol - wt).ravel()

    y0 = np.concatenate([ome0, np.log(np.clip(kap0, 1e-6, None))])
    lo = np.concatenate([np.full(n_modes, bounds_ok[0]), np.full(n_modes, math.log(1e-6))])
    hi = np.concatenate([np.full(n_modes, bounds_ok[1]), np.full(n_modes, math.log(5.0))])
    try:
        out = least_squares(lifted, np.clip(y0, lo, hi), bounds=(lo, hi),
                            method="trf", x_scale="jac", xtol=1e-14, ftol=1e-14,
                            gtol=1e-12, max_nfev=300)
    except Exception:
        return ome0, kap0, None
    ome = out.x[:n_modes]
    kap = np.exp(out.x[n_modes:])
    # recover rank-1 amplitudes from the relaxed symmetric weights
    basis = _lorentz_basis(omegas, ome, kap) / HBAR_EV_FS
    sol = _inner_solve(basis, wt)                                  # (j, p)
    amp = np.zeros((n_em, n_modes))
    for j in range(n_modes):
        pmat = np.zeros((n_em, n_em))
        pmat[rows, cols] = sol[j] / sqw
        pmat[cols, rows] = sol[j] / sqw
        evals, evecs = np.linalg.eigh(pmat)
        top = np.argmax(np.abs(evals))
        amp[:, j] = evecs[:, top] * math.sqrt(max(evals[top], 0.0))
    return ome, kap, _floor_amp(amp)


def _floor_amp(amp):
    # exact-zero coupling columns are saddle points of the least-squares
    # landscape; nudge them so the polish can move
    amp = amp.copy()
    scale = max(np.max(np.abs(amp)), 1e-4)
    for j in range(amp.shape[1]):
        if np.max(np.abs(amp[:, j])) < 1e-4 * scale:
            amp[:, j] = 0.02 * scale
    return amp


def _polish(x0, omegas, target_tri, sqw, rows, cols, n_modes, n_em, bounds,
            x_scale="jac"):
    fun = lambda x: _residual_and_jac(x, omegas, target_tri, sqw, rows, cols,
                                      n_modes, n_em, False)[0]
    jac = lambda x: _residual_and_jac(x, omegas, target_tri, sqw, rows, cols,
                                      n_modes, n_em, True)[1]
    out = least_squares(fun, np.clip(x0, bounds[0], bounds[1]), jac=jac,
                        bounds=bounds, method="trf", x_scale=x_scale,
                        xtol=1e-15, ftol=1e-15, gtol=1e-14, max_nfev=2000)
    return out


def _peak_init(omegas, target_tri, rows, cols, n_modes, n_em, rng):
    """Mode energies at the largest local maxima of the diagonal trace."""
    diag_cols = np.flatnonzero(rows == cols)
    trace = target_tri[:, diag_cols].sum(axis=1)
    interior = np.flatnonzero((trace[1:-1] >= trace[:-2]) & (trace[1:-1] > trace[2:])) + 1
    order = interior[np.argsort(-trace[interior])]
    span = omegas[-1] - omegas[0]
    picks = []
    for idx in order:
        if all(abs(omegas[idx] - omegas[p]) > 0.01 * span for p in picks):
            picks.append(idx)
        if len(picks) == n_modes:
            break
    while len(picks) < n_modes:
        picks.append(int(rng.integers(1, omegas.size - 1)))
    picks = np.array(picks[:n_modes])
    ome0 = omegas[picks]
    # half-width estimate from the curvature-free fallback: a fixed fraction
    kap0 = np.full(n_modes, max(0.05, 0.02 * span))
    amp0 = np.zeros((n_em, n_modes))
    for m, idx in enumerate(picks):
        for a in range(n_em):
            col = np.flatnonzero((rows == a) & (cols == a))[0]
            peak = max(target_tri[idx, col], 0.0) * HBAR_EV_FS
            amp0[a, m] = math.sqrt(math.pi * kap0[m] * peak / 2.0)
    return ome0, kap0, amp0


def fit_modes(target: SpectralDensityGrid, n_modes: int,
              init: EffectiveModeSet | None = None,
              window_ev: tuple | None = None, n_restarts: int = 6,
              seed: int = 0, target_part: str | None = None,
              strict: bool = False) -> EffectiveModeSet:
    """Least-squares fit of the discrete-mode model to a sampled density.

    Minimizes sum_k sum_{a<=b} w_ab (J_model - J_target)^2 with w = 2 on
    off-diagonal elements, over mode energies, widths and coupling columns.
    ``window_ev`` restricts the fitted samples; the default keeps a 1 eV
    half-width band about the grid midpoint.  ``init`` seeds the candidate
    pool (padded with a zero-coupling tail mode when it has fewer modes), so
    refits with n_modes+1 never lose to the seed.  Deterministic for a given
    seed.  When the optimizer stalls above tolerance the best parameters are
    still returned with ``converged=False`` (or FitDidNotConverge when
    ``strict``).
    """
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    omegas_all = target.omegas_ev
    if window_ev is None:
        mid = 0.5 * (omegas_all[0] + omegas_all[-1])
        window_ev = (mid - 1.0, mid + 1.0)
    mask = (omegas_all >= window_ev[0]) & (omegas_all <= window_ev[1])
    if mask.sum() < 4 * n_modes:
        raise ShapeMismatch("fit window keeps too few samples for the model")
    omegas = omegas_all[mask]
    n_em = target.n_emitters
    rows, cols = np.triu_indices(n_em)
    target_tri = target.values[mask][:, rows, cols]
    sqw = np.sqrt(np.where(rows == cols, 1.0, 2.0))
    part = target_part if target_part is not None else target.part
    if part not in ("scattering", "total"):
        part = "scattering"

    rng = np.random.default_rng(seed)
    span = omegas[-1] - omegas[0]
    lo = np.concatenate([np.full(n_modes, omegas[0] - 0.5),
                         np.full(n_modes, 1e-6),
                         np.full(n_em * n_modes, -5.0)])
    hi = np.concatenate([np.full(n_modes, omegas[-1] + 0.5),
                         np.full(n_modes, 5.0),
                         np.full(n_em * n_modes, 5.0)])
    bounds = (lo, hi)
    ome_bounds = (omegas[0] - 0.5, omegas[-1] + 0.5)
    n_k = omegas.size

    def run_candidate(ome0, kap0, amp0, separable=True):
        if separable:
            ome1, kap1, amp1 = _separable_stage(omegas, target_tri, sqw, rows, cols,
                                                n_modes, n_em, ome0, kap0, ome_bounds)
            if amp1 is None:
                amp1 = amp0
        else:
            ome1, kap1, amp1 = ome0, kap0, amp0
        out = _polish(_pack(ome1, kap1, amp1), omegas, target_tri, sqw,
                      rows, cols, n_modes, n_em, bounds)
        return out

    peak_fs = max(float(np.max(np.abs(target_tri))), 1e-300)
    cost_floor = 0.5 * (1e-12 * peak_fs) ** 2 * n_k * rows.size

    candidates = []
    if init is not None:
        if init.n_emitters != n_em:
            raise ShapeMismatch("seed mode set couples a different emitter count")
        ome0 = list(init.mode_energies_ev)[:n_modes]
        kap0 = list(init.mode_widths_ev)[:n_modes]
        amp0 = [list(row)[:n_modes] for row in init.couplings_ev]
        while len(ome0) < n_modes:
            # zero-coupling tail mode: bit-identical model, never hurts the seed
            ome0.append(float(omegas[-1]))
            kap0.append(0.1)
            for row in amp0:
                row.append(0.0)
        x0 = _pack(np.array(ome0), np.array(kap0), np.array(amp0))
        candidates.append(_polish(x0, omegas, target_tri, sqw, rows, cols,
                                  n_modes, n_em, bounds))
    if not (candidates and candidates[-1].cost <= cost_floor):
        ome0, kap0, amp0 = _peak_init(omegas, target_tri, rows, cols, n_modes, n_em, rng)
        candidates.append(run_candidate(ome0, kap0, amp0))
    # incremental build-up: add one mode at the largest residual peak each round
    try:
        cur = None
        for m in range(1, n_modes + 1):
            if candidates[-1].cost <= cost_floor:
                break
            if cur is None:
                o_i, k_i, a_i = _peak_init(omegas, target_tri, rows, cols, 1, n_em, rng)
            else:
                o_prev, k_prev, a_prev = cur
                model = _model_triangle(omegas, o_prev, k_prev, a_prev, rows, cols)
                resid = np.abs((target_tri - model) * sqw[None, :]).sum(axis=1)
                idx = int(np.argmax(resid))
                o_i = np.append(o_prev, omegas[idx])
                k_i = np.append(k_prev, max(0.05, 0.02 * span))
                a_new = np.zeros((n_em, 1))
                for a in range(n_em):
                    col = np.flatnonzero((rows == a) & (cols == a))[0]
                    # seed from the residual magnitude; sign sorts itself out,
                    # zero would be a saddle
                    peak = abs(target_tri[idx, col] - model[idx, col]) * HBAR_EV_FS
                    a_new[a, 0] = math.sqrt(math.pi * k_i[-1] * peak / 2.0)
                a_i = _floor_amp(np.hstack([a_prev, a_new]))
            blo = np.concatenate([np.full(m, omegas[0] - 0.5), np.full(m, 1e-6),
                                  np.full(n_em * m, -5.0)])
            bhi = np.concatenate([np.full(m, omegas[-1] + 0.5), np.full(m, 5.0),
                                  np.full(n_em * m, 5.0)])
            out_m = _polish(_pack(o_i, k_i, a_i), omegas, target_tri, sqw,
                            rows, cols, m, n_em, (blo, bhi))
            cur = _unpack(out_m.x, m, n_em)
            if m == n_modes:
                candidates.append(out_m)
    except Exception:
        pass
    # support band of the diagonal trace, for ladder and random mode placement
    diag_cols = np.flatnonzero(rows == cols)
    trace = target_tri[:, diag_cols].sum(axis=1)
    hot = omegas[trace >= 0.05 * max(trace.max(), 1e-300)]
    band = (hot[0], hot[-1]) if hot.size >= 2 else (omegas[0], omegas[-1])
    peak_scale = max(float(np.max(np.abs(target_tri))) * HBAR_EV_FS, 1e-300)
    center = float(omegas[int(np.argmax(trace))])
    for frac in (1.0, 0.5, 0.25):
        if min(c.cost for c in candidates) <= cost_floor:
            break
        width = max(frac * (band[1] - band[0]), 1e-3)
        if n_modes > 1:
            ome0 = np.linspace(center - 0.5 * width, center + 0.5 * width, n_modes)
        else:
            ome0 = np.array([center])
        kap0 = np.full(n_modes, float(np.clip(0.7 * width / n_modes, 0.03, 0.3)))
        amp0 = np.empty((n_em, n_modes))
        for a in range(n_em):
            col = np.flatnonzero((rows == a) & (cols == a))[0]
            idxs = np.searchsorted(omegas, ome0).clip(0, n_k - 1)
            pk = np.abs(target_tri[idxs, col]) * HBAR_EV_FS
            amp0[a] = np.sqrt(math.pi * kap0 * pk / 2.0)
        candidates.append(run_candidate(ome0, kap0, _floor_amp(amp0)))
    best = min(candidates, key=lambda o: o.cost)
    for r in range(max(0, n_restarts)):
        if best.cost <= cost_floor:
            break
        if r % 2 == 0:
            ome_b, kap_b, amp_b = _unpack(best.x, n_modes, n_em)
            ome_r = ome_b + rng.normal(0.0, 0.02 * span, n_modes)
            kap_r = np.clip(kap_b * np.exp(rng.normal(0.0, 0.3, n_modes)), 1e-6, 5.0)
            amp_scale = max(np.max(np.abs(amp_b)), 1e-4)
            amp_r = _floor_amp(amp_b + rng.normal(0.0, 0.2 * amp_scale, amp_b.shape))
        else:
            ome_r = rng.uniform(band[0], band[1], n_modes)
            kap_r = np.exp(rng.uniform(math.log(0.02), math.log(0.4), n_modes))
            mag = np.sqrt(math.pi * kap_r * peak_scale / 2.0)
            amp_r = mag[None, :] * rng.choice([-1.0, 1.0], (n_em, n_modes)) \
                * rng.uniform(0.3, 1.0, (n_em, n_modes))
        out = run_candidate(ome_r, kap_r, amp_r, separable=bool(r % 2))
        if out.cost < best.cost:
            best = out
    ome, kap, amp = _unpack(best.x, n_modes, n_em)
    order = np.argsort(ome)
    ome, kap, amp = ome[order], kap[order], amp[:, order]
    amp = _canonical_gauge(amp)
    rms = _rms_from_cost(best.cost, n_k, n_em)
    converged = bool(best.status > 0)
    if strict and not converged:
        raise FitDidNotConverge(
            f"mode fit stalled at rms {rms:.3e} (optimizer status {best.status})")
    return EffectiveModeSet(mode_energies_ev=tuple(ome), mode_widths_ev=tuple(kap),
                            couplings_ev=tuple(tuple(row) for row in amp),
                            target_part=part, fit_rms=float(rms), converged=converged)


# ---------------------------------------------------------------------------
# reporting and file IO
# ---------------------------------------------------------------------------

@dataclass
class FitReport:
    """Per-element residual summary of a mode set against a sampled target."""

    element_labels: list
    rms: np.ndarray              # (n_pairs,) 1/fs
    max_dev: np.ndarray          # (n_pairs,) 1/fs
    omega_at_max: np.ndarray     # (n_pairs,) eV
    peak_ratio: np.ndarray       # (n_pairs,) model peak / target peak

    def to_csv(self, path) -> None:
        lines = ["element,rms,max_dev,omega_at_max_eV,peak_ratio"]
        for i, lab in enumerate(self.element_labels):
            lines.append(f"{lab},{self.rms[i]:.11e},{self.max_dev[i]:.11e},"
                         f"{self.omega_at_max[i]:.11e},{self.peak_ratio[i]:.11e}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    def __str__(self):
        parts = [f"{lab}: rms={r:.3e} max={m:.3e} at {w:.4f} eV (peak ratio {p:.4f})"
                 for lab, r, m, w, p in zip(self.element_labels, self.rms,
                                            self.max_dev, self.omega_at_max,
                                            self.peak_ratio)]
        return "\n".join(parts)


def fit_report(modeset: EffectiveModeSet, target: SpectralDensityGrid) -> FitReport:
    if modeset.n_emitters != target.n_emitters:
        raise ShapeMismatch("mode set and target couple different emitter counts")
    model = lorentzian_model(modeset, target.omegas_ev)
    rows, cols = np.triu_indices(target.n_emitters)
    labels = [f"J_{a + 1}{b + 1}" for a, b in zip(rows, cols)]
    diff = model.values[:, rows, cols] - target.values[:, rows, cols]
    rms = np.sqrt(np.mean(diff * diff, axis=0))
    idx = np.argmax(np.abs(diff), axis=0)
    max_dev = np.abs(diff[idx, np.arange(rows.size)])
    omega_at = target.omegas_ev[idx]
    tpk = np.max(np.abs(target.values[:, rows, cols]), axis=0)
    mpk = np.max(np.abs(model.values[:, rows, cols]), axis=0)
    ratio = np.where(tpk > 0, mpk / np.where(tpk > 0, tpk, 1.0), np.inf)
    return FitReport(element_labels=labels, rms=rms, max_dev=max_dev,
                     omega_at_max=omega_at, peak_ratio=ratio)


def write_mode_file(modeset: EffectiveModeSet, path) -> None:
    """Flat key=value serialization; floats use %.12g so printed table values
    survive a round trip verbatim."""
    lines = [f"target_part = {modeset.target_part}",
             f"n_modes = {modeset.n_modes}"]
    for j, val in enumerate(modeset.mode_energies_ev, start=1):
        lines.append(f"omega_ph_{j}_eV = {val:.12g}")
    for j, val in enumerate(modeset.mode_widths_ev, start=1):
        lines.append(f"kappa_ph_{j}_meV = {val * 1e3:.12g}")
    for a, row in enumerate(modeset.couplings_ev, start=1):
        for j, val in enumerate(row, start=1):
            lines.append(f"Omega_{a}_{j}_meV = {val * 1e3:.12g}")
    lines.append(f"fit_rms = {modeset.fit_rms:.12g}")
    lines.append(f"converged = {'true' if modeset.converged else 'false'}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mode_file(path) -> EffectiveModeSet:
    pairs = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"malformed mode-file line: {line!r}")
            key, val = line.split("=", 1)
            pairs[key.strip()] = val.strip()
    try:
        n = int(pairs["n_modes"])
        part = pairs.get("target_part", "scattering")
        ome = [float(pairs[f"omega_ph_{j}_eV"]) for j in range(1, n + 1)]
        kap = [float(pairs[f"kappa_ph_{j}_meV"]) * 1e-3 for j in range(1, n + 1)]
        rows = []
        a = 1
        while f"Omega_{a}_1_meV" in pairs:
            rows.append([float(pairs[f"Omega_{a}_{j}_meV"]) * 1e-3
                         for j in range(1, n + 1)])
            a += 1
        if not rows:
            raise KeyError("Omega_1_1_meV")
        rms = float(pairs.get("fit_rms", "0"))
        conv = pairs.get("converged", "true").lower() in ("true", "1", "yes")
    except KeyError as exc:
        raise ValueError(f"mode file {path} is missing key {exc}") from exc
    return EffectiveModeSet(mode_energies_ev=tuple(ome), mode_widths_ev=tuple(kap),
                            couplings_ev=tuple(tuple(r) for r in rows),
                            target_part=part, fit_rms=rms, converged=conv)
