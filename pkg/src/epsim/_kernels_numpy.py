"""Pure-numpy kernel lane.

Reference implementations of the three hot kernels (plane-wave reflection
integrand, Volterra memory loop, RK4 Lindblad loop).  The numba lane in
``_kernels_numba`` mirrors these signatures exactly; ``_kernels`` picks one at
import time.  Bessel functions come from scipy here; the numba lane carries a
self-contained implementation.
"""

from __future__ import annotations

import numpy as np
from scipy.special import j0 as _sp_j0, j1 as _sp_j1, jv as _sp_jv

NAME = "numpy"


def bessel_j012_array(z):
    """J0, J1, J2 for a complex array, stacked (3, n)."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(z.imag != 0.0):
        b0 = _sp_jv(0, z)
        b1 = _sp_jv(1, z)
    else:
        x = z.real
        b0 = _sp_j0(x).astype(np.complex128)
        b1 = _sp_j1(x).astype(np.complex128)
    small = np.abs(z) < 1e-6
    safe = np.where(small, 1.0, z)
    b2 = np.where(small, z * z / 8.0, 2.0 * b1 / safe - b0)
    return np.stack([b0, b1, b2])


def sommerfeld_integrand(k, k0, eps, z_sum, rho):
    """Radial integrands of the six reflected-field integrals, (6, n).

    Components (measure dk already folded in, Bessel argument k*rho):
      0: (k/kz1) r_s J0 e^{i kz1 Z}        3: (k kz1/k0^2) r_p J2 e^{i kz1 Z}
      1: (k/kz1) r_s J2 e^{i kz1 Z}        4: (k^2/k0^2) r_p J1 e^{i kz1 Z}
      2: (k kz1/k0^2) r_p J0 e^{i kz1 Z}   5: (k^3/(k0^2 kz1)) r_p J0 e^{i kz1 Z}

    kz branches are fixed to Im kz >= 0 (retarded half-space response).
    """
    k = np.asarray(k, dtype=np.complex128)
    k02 = k0 * k0
    kz1 = np.sqrt(k02 - k * k + 0j)
    kz1 = np.where(kz1.imag < 0.0, -kz1, kz1)
    kz2 = np.sqrt(eps * k02 - k * k + 0j)
    kz2 = np.where(kz2.imag < 0.0, -kz2, kz2)
    rs = (kz1 - kz2) / (kz1 + kz2)
    rp = (eps * kz1 - kz2) / (eps * kz1 + kz2)
    ex = np.exp(1j * kz1 * z_sum)
    b0, b1, b2 = bessel_j012_array(k * rho)
    out = np.empty((6, k.size), dtype=np.complex128)
    cs = (k / kz1) * rs * ex
    out[0] = cs * b0
    out[1] = cs * b2
    cp = (k * kz1 / k02) * rp * ex
    out[2] = cp * b0
    out[3] = cp * b2
    out[4] = (k * k / k02) * rp * b1 * ex
    out[5] = (k * k * k / (k02 * kz1)) * rp * b0 * ex
    return out


# ---------------------------------------------------------------------------
# Volterra memory loop
# ---------------------------------------------------------------------------

def _volterra_rhs(n, c, kres, kcr, markov, dt, use_cr):
    m = kres.shape[1]
    f = -markov @ c[n]
    if n == 0:
        return f
    w = np.ones(n + 1)
    w[0] = 0.5
    w[n] = 0.5
    hist = c[: n + 1]
    kern = kres[n::-1]                      # kres[n - t] for t = 0..n
    f = f - np.einsum("t,tab,tb->a", w, kern, hist) * dt
    if use_cr:
        kc = kcr[n: 2 * n + 1]              # kcr[n + t]
        diag = kc.diagonal(axis1=1, axis2=2)        # (n+1, m)
        trace = diag.sum(axis=1)                    # sum_b kcr[n+t, b, b]
        cr = (w * trace) @ hist                     # sum over b of diagonal, all a
        cr = cr - np.einsum("t,ta,ta->a", w, diag, hist)       # remove b == a
        cr = cr + np.einsum("t,tba,tb->a", w, kc, hist)        # cross kernel
        cr = cr - np.einsum("t,ta,ta->a", w, diag, hist)       # remove its b == a
        f = f - cr * dt
    return f


def volterra_propagate(kres, kcr, markov, c0, dt, use_cr):
    """Trapezoidal predictor-corrector solution of the amplitude memory equations.

    kres[n] is the same-time-difference kernel at tau = n*dt, kcr[s] the
    counter-rotating kernel at t + t' = s*dt (length 2*n_t - 1), markov a
    constant matrix applied to C(t) (combined free-space decay/coupling, 1/fs).
    Returns amplitudes (n_t, m).
    """
    n_t, m = kres.shape[0], kres.shape[1]
    c = np.zeros((n_t, m), dtype=np.complex128)
    c[0] = c0
    f_cur = _volterra_rhs(0, c, kres, kcr, markov, dt, use_cr)
    for n in range(n_t - 1):
        c[n + 1] = c[n] + dt * f_cur
        f_pred = _volterra_rhs(n + 1, c, kres, kcr, markov, dt, use_cr)
        c[n + 1] = c[n] + 0.5 * dt * (f_cur + f_pred)
        f_cur = _volterra_rhs(n + 1, c, kres, kcr, markov, dt, use_cr)
    return c


# ---------------------------------------------------------------------------
# RK4 Lindblad loop
# ---------------------------------------------------------------------------

def _lb_rhs(rho, h_nh, h_nh_dag, jump_left, jump_right):
    out = -1j * (h_nh @ rho - rho @ h_nh_dag)
    for i in range(jump_left.shape[0]):
        out = out + jump_left[i] @ rho @ jump_right[i]
    return 0.5 * (out + out.conj().T)


def _rk4_step(rho, dt, h_nh, h_nh_dag, jl, jr):
    k1 = _lb_rhs(rho, h_nh, h_nh_dag, jl, jr)
    k2 = _lb_rhs(rho + 0.5 * dt * k1, h_nh, h_nh_dag, jl, jr)
    k3 = _lb_rhs(rho + 0.5 * dt * k2, h_nh, h_nh_dag, jl, jr)
    k4 = _lb_rhs(rho + dt * k3, h_nh, h_nh_dag, jl, jr)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_lindblad_propagate(h_nh, jump_left, jump_right, rho0, dt, n_steps,
                           store_every, check_every, local_tol, pop_tol, trace_tol):
    """Fixed-step RK4 for rho' = -i(H_nh rho - rho H_nh^+) + sum_i L_i rho R_i.

    H_nh in rad/fs already contains the -i/2 anticommutator drains.  Every
    ``check_every`` steps the local error (one dt step vs two dt/2 steps) and
    state physicality (diagonal bounds, trace drift) are probed.

    Returns (trajectory (n_stored, d, d), status, step):
    status 0 = ok, 1 = local error above local_tol, 2 = non-physical state.
    """
    d = rho0.shape[0]
    h_nh_dag = np.ascontiguousarray(h_nh.conj().T)
    n_stored = n_steps // store_every + 1
    traj = np.zeros((n_stored, d, d), dtype=np.complex128)
    traj[0] = rho0
    rho = rho0.astype(np.complex128).copy()
    si = 1
    for step in range(1, n_steps + 1):
        if check_every > 0 and step % check_every == 0:
            half = _rk4_step(rho, 0.5 * dt, h_nh, h_nh_dag, jump_left, jump_right)
            two_half = _rk4_step(half, 0.5 * dt, h_nh, h_nh_dag, jump_left, jump_right)
            rho = _rk4_step(rho, dt, h_nh, h_nh_dag, jump_left, jump_right)
            if np.max(np.abs(rho - two_half)) > local_tol:
                return traj[:si], 1, step
            pops = np.real(np.diag(rho))
            tr = pops.sum()
            if pops.min() < -pop_tol or pops.max() > 1.0 + pop_tol or abs(tr - 1.0) > trace_tol:
                return traj[:si], 2, step
        else:
            rho = _rk4_step(rho, dt, h_nh, h_nh_dag, jump_left, jump_right)
        if step % store_every == 0:
            traj[si] = rho
            si += 1
    return traj, 0, n_steps
