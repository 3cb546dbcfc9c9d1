"""Numba kernel lane.

Jitted twins of the ``_kernels_numpy`` functions.  Signatures match exactly so
``_kernels`` can swap lanes freely.  Bessel J0/J1 are self-contained: power
series below |x| = 14, loop-generated large-argument asymptotics above, and a
power series for the (small-modulus) complex arguments that occur on the
detoured part of the reflection contour.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

NAME = "numba"

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@njit(cache=True)
def _j01_series_real(x):
    q = 0.25 * x * x
    t = 1.0
    s0 = 1.0
    for m in range(1, 60):
        t *= -q / (m * m)
        s0 += t
        if abs(t) < 1e-17:
            break
    t = 1.0
    s1 = 1.0
    for m in range(1, 60):
        t *= -q / (m * (m + 1.0))
        s1 += t
        if abs(t) < 1e-17:
            break
    return s0, 0.5 * x * s1


@njit(cache=True)
def _j_asymptotic(x, four_nu2, chi_shift):
    # Hankel expansion J_nu = sqrt(2/(pi x)) [P cos(chi) - Q sin(chi)],
    # chi = x - chi_shift; term recurrence t_{m+1} = t_m (4nu^2-(2m+1)^2)/(8(m+1)x).
    p = 1.0
    q = 0.0
    t = 1.0
    prev = 1e300
    for m in range(17):
        t = t * (four_nu2 - (2 * m + 1) ** 2) / (8.0 * (m + 1) * x)
        mm = m + 1
        at = abs(t)
        if at >= prev:
            break
        prev = at
        if mm % 2 == 1:
            if ((mm - 1) // 2) % 2 == 0:
                q += t
            else:
                q -= t
        else:
            if (mm // 2) % 2 == 0:
                p += t
            else:
                p -= t
        if at < 1e-17:
            break
    chi = x - chi_shift
    return _SQRT_2_OVER_PI / math.sqrt(x) * (p * math.cos(chi) - q * math.sin(chi))


@njit(cache=True)
def _j0_j1_real(x):
    ax = abs(x)
    if ax < 14.0:
        b0, b1 = _j01_series_real(ax)
    else:
        b0 = _j_asymptotic(ax, 0.0, 0.25 * math.pi)
        b1 = _j_asymptotic(ax, 4.0, 0.75 * math.pi)
    if x < 0.0:
        b1 = -b1
    return b0, b1


@njit(cache=True)
def _j0_j1_complex(z):
    q = 0.25 * z * z
    t = 1.0 + 0j
    s0 = 1.0 + 0j
    for m in range(1, 60):
        t *= -q / (m * m)
        s0 += t
        if abs(t) < 1e-17:
            break
    t = 1.0 + 0j
    s1 = 1.0 + 0j
    for m in range(1, 60):
        t *= -q / (m * (m + 1.0))
        s1 += t
        if abs(t) < 1e-17:
            break
    return s0, 0.5 * z * s1


@njit(cache=True)
def _j_asymptotic_cplx(z, four_nu2, chi_shift):
    # same Hankel expansion as the real path; chi is complex so cos/sin come
    # from exponentials (|Im z| stays O(1) on the detour, no overflow)
    p = 1.0 + 0j
    q = 0.0 + 0j
    t = 1.0 + 0j
    prev = 1e300
    for m in range(17):
        t = t * (four_nu2 - (2 * m + 1) ** 2) / (8.0 * (m + 1) * z)
        mm = m + 1
        at = abs(t)
        if at >= prev:
            break
        prev = at
        if mm % 2 == 1:
            if ((mm - 1) // 2) % 2 == 0:
                q += t
            else:
                q -= t
        else:
            if (mm // 2) % 2 == 0:
                p += t
            else:
                p -= t
        if at < 1e-17:
            break
    chi = z - chi_shift
    eip = np.exp(1j * chi)
    eim = np.exp(-1j * chi)
    cosc = 0.5 * (eip + eim)
    sinc = -0.5j * (eip - eim)
    return _SQRT_2_OVER_PI / np.sqrt(z) * (p * cosc - q * sinc)


@njit(cache=True)
def _j012(z):
    if z.imag == 0.0:
        b0r, b1r = _j0_j1_real(z.real)
        b0 = complex(b0r, 0.0)
        b1 = complex(b1r, 0.0)
    elif abs(z) < 14.0:
        b0, b1 = _j0_j1_complex(z)
    else:
        # the power series cancels catastrophically out here; principal-branch
        # asymptotics need Re z > 0, which holds everywhere on the contour
        b0 = _j_asymptotic_cplx(z, 0.0, 0.25 * math.pi)
        b1 = _j_asymptotic_cplx(z, 4.0, 0.75 * math.pi)
    if abs(z) < 1e-6:
        b2 = z * z / 8.0
    else:
        b2 = 2.0 * b1 / z - b0
    return b0, b1, b2


@njit(cache=True)
def bessel_j012_array(z):
    out = np.empty((3, z.size), np.complex128)
    for i in range(z.size):
        b0, b1, b2 = _j012(z[i])
        out[0, i] = b0
        out[1, i] = b1
        out[2, i] = b2
    return out


@njit(cache=True)
def sommerfeld_integrand(k, k0, eps, z_sum, rho):
    n = k.size
    out = np.empty((6, n), np.complex128)
    k02 = k0 * k0
    for i in range(n):
        ki = k[i]
        kz1 = np.sqrt(k02 - ki * ki + 0j)
        if kz1.imag < 0.0:
            kz1 = -kz1
        kz2 = np.sqrt(eps * k02 - ki * ki + 0j)
        if kz2.imag < 0.0:
            kz2 = -kz2
        rs = (kz1 - kz2) / (kz1 + kz2)
        rp = (eps * kz1 - kz2) / (eps * kz1 + kz2)
        ex = np.exp(1j * kz1 * z_sum)
        b0, b1, b2 = _j012(ki * rho)
        cs = ki / kz1 * rs * ex
        out[0, i] = cs * b0
        out[1, i] = cs * b2
        cp = ki * kz1 / k02 * rp * ex
        out[2, i] = cp * b0
        out[3, i] = cp * b2
        out[4, i] = ki * ki / k02 * rp * b1 * ex
        out[5, i] = ki * ki * ki / (k02 * kz1) * rp * b0 * ex
    return out


# ---------------------------------------------------------------------------
# Volterra memory loop
# ---------------------------------------------------------------------------

@njit(cache=True)
def _volterra_rhs(n, c, kres, kcr, markov, dt, use_cr):
    m = kres.shape[1]
    f = np.zeros(m, np.complex128)
    if n > 0:
        for a in range(m):
            acc = 0.0 + 0j
            for t in range(n + 1):
                w = 0.5 if (t == 0 or t == n) else 1.0
                for b in range(m):
                    acc += w * kres[n - t, a, b] * c[t, b]
            f[a] -= acc * dt
        if use_cr:
            for a in range(m):
                acc = 0.0 + 0j
                for t in range(n + 1):
                    w = 0.5 if (t == 0 or t == n) else 1.0
                    for b in range(m):
                        if b != a:
                            acc += w * (kcr[n + t, b, b] * c[t, a]
                                        + kcr[n + t, b, a] * c[t, b])
                f[a] -= acc * dt
    for a in range(m):
        acc = 0.0 + 0j
        for b in range(m):
            acc += markov[a, b] * c[n, b]
        f[a] -= acc
    return f


@njit(cache=True)
def volterra_propagate(kres, kcr, markov, c0, dt, use_cr):
    n_t, m = kres.shape[0], kres.shape[1]
    c = np.zeros((n_t, m), np.complex128)
    for a in range(m):
        c[0, a] = c0[a]
    f_cur = _volterra_rhs(0, c, kres, kcr, markov, dt, use_cr)
    for n in range(n_t - 1):
        for a in range(m):
            c[n + 1, a] = c[n, a] + dt * f_cur[a]
        f_pred = _volterra_rhs(n + 1, c, kres, kcr, markov, dt, use_cr)
        for a in range(m):
            c[n + 1, a] = c[n, a] + 0.5 * dt * (f_cur[a] + f_pred[a])
        f_cur = _volterra_rhs(n + 1, c, kres, kcr, markov, dt, use_cr)
    return c


# ---------------------------------------------------------------------------
# RK4 Lindblad loop
# ---------------------------------------------------------------------------

@njit(cache=True)
def _lb_rhs(rho, h_nh, h_nh_dag, jump_left, jump_right):
    out = -1j * (h_nh @ rho - rho @ h_nh_dag)
    for i in range(jump_left.shape[0]):
        out += jump_left[i] @ (rho @ jump_right[i])
    d = rho.shape[0]
    for a in range(d):
        for b in range(a, d):
            v = 0.5 * (out[a, b] + np.conj(out[b, a]))
            out[a, b] = v
            out[b, a] = np.conj(v)
    return out


@njit(cache=True)
def _rk4_step(rho, dt, h_nh, h_nh_dag, jl, jr):
    k1 = _lb_rhs(rho, h_nh, h_nh_dag, jl, jr)
    k2 = _lb_rhs(rho + 0.5 * dt * k1, h_nh, h_nh_dag, jl, jr)
    k3 = _lb_rhs(rho + 0.5 * dt * k2, h_nh, h_nh_dag, jl, jr)
    k4 = _lb_rhs(rho + dt * k3, h_nh, h_nh_dag, jl, jr)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def rk4_lindblad_propagate(h_nh, jump_left, jump_right, rho0, dt, n_steps,
                           store_every, check_every, local_tol, pop_tol, trace_tol):
    d = rho0.shape[0]
    h_nh_dag = np.ascontiguousarray(np.conj(h_nh).T)
    n_stored = n_steps // store_every + 1
    traj = np.zeros((n_stored, d, d), np.complex128)
    traj[0] = rho0
    rho = rho0.astype(np.complex128).copy()
    si = 1
    for step in range(1, n_steps + 1):
        if check_every > 0 and step % check_every == 0:
            half = _rk4_step(rho, 0.5 * dt, h_nh, h_nh_dag, jump_left, jump_right)
            two_half = _rk4_step(half, 0.5 * dt, h_nh, h_nh_dag, jump_left, jump_right)
            rho = _rk4_step(rho, dt, h_nh, h_nh_dag, jump_left, jump_right)
            err = 0.0
            tr = 0.0
            pmin = 1e300
            pmax = -1e300
            for a in range(d):
                for b in range(d):
                    e = abs(rho[a, b] - two_half[a, b])
                    if e > err:
                        err = e
                p = rho[a, a].real
                tr += p
                if p < pmin:
                    pmin = p
                if p > pmax:
                    pmax = p
            if err > local_tol:
                return traj[:si], 1, step
            if pmin < -pop_tol or pmax > 1.0 + pop_tol or abs(tr - 1.0) > trace_tol:
                return traj[:si], 2, step
        else:
            rho = _rk4_step(rho, dt, h_nh, h_nh_dag, jump_left, jump_right)
        if step % store_every == 0:
            traj[si] = rho
            si += 1
    return traj, 0, n_steps
