"""Dyadic Green tensors of the emitter environment.

Two pieces: the homogeneous (free-space) retarded tensor in closed form, and
the reflected part above a planar Drude half space, assembled from six radial
plane-wave integrals.  The radial integration runs along a contour that dips
below the real axis on an elliptic arc bracketing both the light-line branch
point and the surface-mode pole of r_p (the pole sits in the upper half plane
for a lossy metal, so passing underneath keeps the retarded prescription even
in the lossless limit).  The real tail is truncated where the evanescent
envelope exp(-Im k_z (z+z')) drops below 1e-12.

All lengths in nm, energies in eV; Green tensor entries carry 1/nm.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from . import _kernels
from .core import (
    CoincidentPointsRealPart,
    EmitterBelowInterface,
    Environment,
    NonpositiveFrequency,
    QuadratureNotConverged,
    wavenumber_nm,
)

__all__ = [
    "GreenTensor",
    "drude_permittivity",
    "fresnel_coefficients",
    "free_space_green",
    "halfspace_scattering_green",
    "clear_green_cache",
]

_COINCIDENT_NM = 1e-9


@dataclass(frozen=True)
class GreenTensor:
    """3x3 dyadic Green tensor sample (1/nm) with provenance.

    ``real_part_valid`` is False for the homogeneous tensor at coincident
    points, where only the imaginary part is finite.
    """

    value: np.ndarray
    energy_ev: float
    r1_nm: tuple[float, float, float]
    r2_nm: tuple[float, float, float]
    part: str = "free_space"
    real_part_valid: bool = True
    error_estimate: float = 0.0

    @property
    def imag_part(self) -> np.ndarray:
        return self.value.imag.copy()

    @property
    def real_part(self) -> np.ndarray:
        if not self.real_part_valid:
            raise CoincidentPointsRealPart(
                "the real part of the homogeneous Green tensor diverges at "
                "coincident points; only the imaginary part is available")
        return self.value.real.copy()


def drude_permittivity(energy_ev: float, environment: Environment,
                       z_nm: float | None = None) -> complex:
    """Relative permittivity of the environment at the given photon energy.

    With ``z_nm`` given, returns 1 for points above the interface.  Raises
    NonpositiveFrequency for energy <= 0.
    """
    return environment.permittivity(energy_ev, z_nm=z_nm)


def fresnel_coefficients(k_par, energy_ev: float, environment: Environment):
    """Reflection coefficients (r_s, r_p) of the planar interface.

    ``k_par`` (1/nm, real or complex, scalar or array) is the in-plane
    wavenumber.  Both normal wavenumbers use the Im k_z >= 0 branch.
    """
    if energy_ev <= 0.0:
        raise NonpositiveFrequency(f"fresnel_coefficients requires energy > 0, got {energy_ev}")
    eps = environment.permittivity(energy_ev)
    k0 = wavenumber_nm(energy_ev)
    k = np.asarray(k_par, dtype=np.complex128)
    kz1 = np.sqrt(k0 * k0 - k * k + 0j)
    kz1 = np.where(kz1.imag < 0.0, -kz1, kz1)
    kz2 = np.sqrt(eps * k0 * k0 - k * k + 0j)
    kz2 = np.where(kz2.imag < 0.0, -kz2, kz2)
    rs = (kz1 - kz2) / (kz1 + kz2)
    rp = (eps * kz1 - kz2) / (eps * kz1 + kz2)
    if np.ndim(k_par) == 0:
        return complex(rs), complex(rp)
    return rs, rp


# ---------------------------------------------------------------------------
# homogeneous tensor
# ---------------------------------------------------------------------------

def free_space_green(r1, r2, energy_ev: float) -> GreenTensor:
    """Retarded homogeneous-medium dyadic Green tensor between two points.

    At coincident points only the imaginary part k/(6 pi) I is returned and
    the real part is flagged singular.
    """
    if energy_ev <= 0.0:
        raise NonpositiveFrequency(f"free_space_green requires energy > 0, got {energy_ev}")
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    k = wavenumber_nm(energy_ev)
    rvec = r1 - r2
    dist = float(np.linalg.norm(rvec))
    if dist < _COINCIDENT_NM:
        val = 1j * k / (6.0 * math.pi) * np.eye(3, dtype=np.complex128)
        return GreenTensor(value=val, energy_ev=energy_ev, r1_nm=tuple(r1), r2_nm=tuple(r2),
                           part="free_space", real_part_valid=False)
    n = rvec / dist
    x = k * dist
    phase = np.exp(1j * x) / (4.0 * math.pi * dist)
    coef_i = 1.0 + (1j * x - 1.0) / (x * x)
    coef_nn = (3.0 - 3.0j * x - x * x) / (x * x)
    val = phase * (coef_i * np.eye(3) + coef_nn * np.outer(n, n))
    return GreenTensor(value=val.astype(np.complex128), energy_ev=energy_ev,
                       r1_nm=tuple(r1), r2_nm=tuple(r2), part="free_space")


# ---------------------------------------------------------------------------
# reflected tensor: adaptive panel quadrature on the deformed contour
# ---------------------------------------------------------------------------

_X7, _W7 = roots_legendre(7)
_X15, _W15 = roots_legendre(15)
_XPAIR = np.concatenate([_X15, _X7])          # high rule first, low rule after

# contour shape parameters
_DETOUR_DEPTH = 0.02                           # in units of k0
_TAIL_EXPONENT = 27.631021115928547            # -log(1e-12)


def _segment_nodes(seg, t0: float, t1: float, xs: np.ndarray):
    """Map rule abscissae on [-1, 1] to contour points and path jacobians."""
    tm = 0.5 * (t0 + t1)
    th = 0.5 * (t1 - t0)
    t = tm + th * xs
    if seg[0] == 0:
        z0, z1 = seg[1], seg[2]
        kpts = z0 + (z1 - z0) * t
        jac = np.full(t.shape, (z1 - z0), dtype=np.complex128)
    else:
        center, ax, ay = seg[1], seg[2], seg[3]
        kpts = center - ax * np.cos(math.pi * t) - 1j * ay * np.sin(math.pi * t)
        jac = math.pi * (ax * np.sin(math.pi * t) - 1j * ay * np.cos(math.pi * t))
    return kpts.astype(np.complex128), jac * th


def _eval_panels(panels, segments, k0, eps, z_sum, rho):
    """Batched G15/G7 evaluation of a list of (segment index, t0, t1) panels.

    Returns (vals (n_p, 6), errs (n_p, 6)).
    """
    n_p = len(panels)
    n_nodes = _XPAIR.size
    kall = np.empty(n_p * n_nodes, dtype=np.complex128)
    jall = np.empty(n_p * n_nodes, dtype=np.complex128)
    for i, (si, t0, t1) in enumerate(panels):
        kpts, jac = _segment_nodes(segments[si], t0, t1, _XPAIR)
        kall[i * n_nodes:(i + 1) * n_nodes] = kpts
        jall[i * n_nodes:(i + 1) * n_nodes] = jac
    f = _kernels.sommerfeld_integrand(kall, k0, eps, z_sum, rho)        # (6, n_p*n_nodes)
    f = (f * jall).reshape(6, n_p, n_nodes)
    v15 = f[:, :, :15] @ _W15
    v7 = f[:, :, 15:] @ _W7
    vals = v15.T
    errs = np.abs(v15 - v7).T
    return vals, errs


def _scattering_integrals(k0: float, eps: complex, z_sum: float, rho: float,
                          rtol: float, max_panels: int, min_subdiv: int):
    """The six radial integrals over the deformed contour, plus error estimates."""
    sq = math.sqrt(abs(eps))
    k_a = min(0.8 * sq, 0.9) * k0
    k_b = max(1.5 * sq, 1.2) * k0
    depth = _DETOUR_DEPTH * k0
    k_max = max(math.hypot(k0, _TAIL_EXPONENT / z_sum), 1.2 * k_b)

    segments = [
        (0, 0.0 + 0j, k_a + 0j),
        (1, 0.5 * (k_a + k_b), 0.5 * (k_b - k_a), depth),
        (0, k_b + 0j, k_max + 0j),
    ]
    n_init = [
        min(2 + int((k0 * z_sum + k_a * rho) / math.pi), 40),
        min(8 + int(k_b * rho / math.pi), 60),
        min(4 + int((k_max - k_b) * (rho / math.pi + z_sum / 6.0)), 400),
    ]
    panels = []
    for si, n0 in enumerate(n_init):
        n0 = max(1, n0) * max(1, min_subdiv)
        edges = np.linspace(0.0, 1.0, n0 + 1)
        panels.extend((si, edges[i], edges[i + 1]) for i in range(n0))

    vals, errs = _eval_panels(panels, segments, k0, eps, z_sum, rho)
    for _ in range(60):
        total = vals.sum(axis=0)
        err_total = errs.sum(axis=0)
        scale = max(np.max(np.abs(total)), 1e-300)
        tol = rtol * np.maximum(np.abs(total), 1e-3 * scale)
        if np.all(err_total <= tol):
            return total, err_total
        if len(panels) >= max_panels:
            break
        share = tol / max(len(panels), 1)
        bad = np.where(np.any(errs > share[None, :], axis=1))[0]
        if bad.size == 0:
            bad = np.array([int(np.argmax((errs / tol[None, :]).max(axis=1)))])
        room = max_panels - len(panels)
        if bad.size > room:
            order = np.argsort(-(errs / tol[None, :]).max(axis=1))
            bad = order[:room]
        new_panels = []
        for i in bad:
            si, t0, t1 = panels[i]
            tm = 0.5 * (t0 + t1)
            new_panels.append((si, t0, tm))
            new_panels.append((si, tm, t1))
        keep = [p for i, p in enumerate(panels) if i not in set(bad.tolist())]
        keep_mask = np.ones(len(panels), dtype=bool)
        keep_mask[bad] = False
        nv, ne = _eval_panels(new_panels, segments, k0, eps, z_sum, rho)
        panels = keep + new_panels
        vals = np.concatenate([vals[keep_mask], nv])
        errs = np.concatenate([errs[keep_mask], ne])
    total = vals.sum(axis=0)
    err_total = errs.sum(axis=0)
    scale = max(np.max(np.abs(total)), 1e-300)
    tol = rtol * np.maximum(np.abs(total), 1e-3 * scale)
    if np.all(err_total <= tol):
        return total, err_total
    raise QuadratureNotConverged(
        f"reflected-field quadrature not converged with {len(panels)} panels: "
        f"max err/tol = {float(np.max(err_total / tol)):.3g}")


_green_cache: dict = {}
_cache_lock = threading.Lock()


def clear_green_cache() -> None:
    with _cache_lock:
        _green_cache.clear()


def _cached_integrals(k0, eps, z_sum, rho, rtol, max_panels, min_subdiv):
    key = (f"{k0:.13e}", f"{z_sum:.13e}", f"{rho:.13e}",
           f"{eps.real:.13e}", f"{eps.imag:.13e}", rtol, min_subdiv)
    with _cache_lock:
        hit = _green_cache.get(key)
    if hit is not None:
        return hit
    res = _scattering_integrals(k0, eps, z_sum, rho, rtol, max_panels, min_subdiv)
    with _cache_lock:
        if len(_green_cache) > 200000:
            _green_cache.clear()
        _green_cache[key] = res
    return res


def halfspace_scattering_green(r1, r2, energy_ev: float, environment: Environment,
                               rtol: float = 1e-8, max_panels: int = 4000,
                               min_subdiv: int = 1) -> GreenTensor:
    """Reflected part of the Green tensor above the planar interface.

    Finite for r1 = r2 (the image geometry keeps z + z' > 0).  Identically
    zero for a free-space environment.  Raises QuadratureNotConverged when the
    panel budget is exhausted above tolerance, EmitterBelowInterface when a
    point is not strictly above the interface.
    """
    if energy_ev <= 0.0:
        raise NonpositiveFrequency(
            f"halfspace_scattering_green requires energy > 0, got {energy_ev}")
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    if environment.is_free_space:
        return GreenTensor(value=np.zeros((3, 3), dtype=np.complex128),
                           energy_ev=energy_ev, r1_nm=tuple(r1), r2_nm=tuple(r2),
                           part="scattering")
    zi = environment.interface_z_nm
    if r1[2] <= zi or r2[2] <= zi:
        raise EmitterBelowInterface(
            f"scattering tensor requires both points above z = {zi} nm")
    eps = environment.permittivity(energy_ev)
    k0 = wavenumber_nm(energy_ev)
    if abs(eps - 1.0) < 1e-15:
        return GreenTensor(value=np.zeros((3, 3), dtype=np.complex128),
                           energy_ev=energy_ev, r1_nm=tuple(r1), r2_nm=tuple(r2),
                           part="scattering")
    z_sum = (r1[2] - zi) + (r2[2] - zi)
    dx = r1[0] - r2[0]
    dy = r1[1] - r2[1]
    rho = math.hypot(dx, dy)
    psi = math.atan2(dy, dx) if rho > 0.0 else 0.0

    ints, errs = _cached_integrals(k0, eps, z_sum, rho, rtol, max_panels, min_subdiv)
    i1, i2, i3, i4, i5, i6 = ints

    c1 = math.cos(psi)
    s1 = math.sin(psi)
    c2 = math.cos(2.0 * psi)
    s2 = math.sin(2.0 * psi)
    p8 = 1j / (8.0 * math.pi)
    p4 = 1.0 / (4.0 * math.pi)
    g = np.zeros((3, 3), dtype=np.complex128)
    g[0, 0] = p8 * (i1 + c2 * i2 - i3 + c2 * i4)
    g[1, 1] = p8 * (i1 - c2 * i2 - i3 - c2 * i4)
    g[0, 1] = g[1, 0] = p8 * s2 * (i2 + i4)
    g[0, 2] = p4 * c1 * i5
    g[2, 0] = -g[0, 2]
    g[1, 2] = p4 * s1 * i5
    g[2, 1] = -g[1, 2]
    g[2, 2] = 1j / (4.0 * math.pi) * i6

    err = float(np.max(errs)) / (4.0 * math.pi)
    return GreenTensor(value=g, energy_ev=energy_ev, r1_nm=tuple(r1), r2_nm=tuple(r2),
                       part="scattering", error_estimate=err)
