"""Scenario types, unit system and validation.

Everything downstream works in a fixed internal unit system: energies in eV,
lengths in nm, times in fs.  Green tensors then carry 1/nm, spectral densities
1/fs, and all couplings / rates / shifts are reported as energies in eV
(divide by ``HBAR_EV_FS`` for a rate in 1/fs).

A scenario is a set of point emitters (two-level molecules with a fixed
transition dipole) embedded in either free space or the upper half space above
a planar Drude metal.  ``validate_scenario`` is the single entry point that
checks geometry and parameters and returns an immutable handle used by the
rest of the package.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SimulationError",
    "EmitterBelowInterface",
    "CoincidentEmitters",
    "NonpositiveFrequency",
    "CoincidentPointsRealPart",
    "QuadratureNotConverged",
    "ZeroDiagonal",
    "NotPositiveSemidefinite",
    "FitDidNotConverge",
    "StepSizeTooLarge",
    "NonPhysicalState",
    "KernelGridTooCoarse",
    "GridMismatch",
    "ShapeMismatch",
    "ConfigParseError",
    "NonDegenerateEmitters",
    "UnitSystem",
    "UNITS",
    "HBAR_EV_FS",
    "C_NM_FS",
    "GREEN_TO_SPECTRAL",
    "COUPLING_PREFACTOR_EV",
    "to_angular_frequency",
    "to_energy_ev",
    "wavenumber_nm",
    "Emitter",
    "Environment",
    "Scenario",
    "validate_scenario",
]


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

class SimulationError(Exception):
    """Base class for all package-specific failures."""


class EmitterBelowInterface(SimulationError):
    """Emitter placed at or below the metal surface."""


class CoincidentEmitters(SimulationError):
    """Two emitters closer than the coincidence tolerance."""


class NonpositiveFrequency(SimulationError):
    """A frequency/energy argument that must be > 0 was not."""


class CoincidentPointsRealPart(SimulationError):
    """Re G0 requested at coincident points, where it diverges."""


class QuadratureNotConverged(SimulationError):
    """Adaptive panel quadrature exhausted its budget above tolerance."""


class ZeroDiagonal(SimulationError):
    """Normalization impossible: a diagonal spectral density vanishes."""


class NotPositiveSemidefinite(SimulationError):
    """A matrix required to be PSD has a significantly negative eigenvalue."""


class FitDidNotConverge(SimulationError):
    """Mode fit stopped without meeting its convergence criteria."""


class StepSizeTooLarge(SimulationError):
    """Fixed-step integrator local error estimate above tolerance."""


class NonPhysicalState(SimulationError):
    """Density matrix populations/trace left physical bounds."""


class KernelGridTooCoarse(SimulationError):
    """Memory kernel changes beyond tolerance under frequency-grid refinement."""


class GridMismatch(SimulationError):
    """Two traces/grids do not share the same axis."""


class ShapeMismatch(SimulationError):
    """Operator/state dimensions are inconsistent."""


class ConfigParseError(SimulationError):
    """Config file rejected; message carries line number and field."""


class NonDegenerateEmitters(SimulationError):
    """Method requires all emitters to share one transition energy."""


# ---------------------------------------------------------------------------
# unit system
# ---------------------------------------------------------------------------

# SI anchors (CODATA 2018 exact values where defined).  hbar must come from
# the exact h; the rounded 1.054571817e-34 is 6e-10 off and misses the
# accepted 0.6582119569 eV fs in the 9th digit.
_E_CHARGE_C = 1.602176634e-19
_PLANCK_SI = 6.62607015e-34      # J s, exact
_HBAR_SI = _PLANCK_SI / (2.0 * math.pi)
_EPS0_SI = 8.8541878128e-12      # F/m
_C_SI = 2.99792458e8             # m/s
_DEBYE_CM = 3.33564e-30          # C m

HBAR_EV_FS = _HBAR_SI / _E_CHARGE_C * 1e15   # 0.6582119569 eV fs
C_NM_FS = _C_SI * 1e-6                       # 299.792458 nm/fs

# J(omega) in 1/fs from (E/eV)^2 * (m_a m_b / Debye^2) * (mu_a . Im G . mu_b in 1/nm):
#   J = omega^2/(pi hbar eps0 c^2) mu_a . Im G . mu_b
# assembled in SI and converted to 1/fs with the 1e9 (1/m -> 1/nm view of G) and
# 1e-15 (1/s -> 1/fs) factors folded in.
GREEN_TO_SPECTRAL = (
    (_E_CHARGE_C / _HBAR_SI) ** 2
    * _DEBYE_CM ** 2
    / (math.pi * _HBAR_SI * _EPS0_SI * _C_SI ** 2)
    * 1e9
    * 1e-15
)

# (omega^2/eps0 c^2) mu_a . X . mu_b  as an energy in eV, for X in 1/nm:
# equals pi * hbar * [GREEN_TO_SPECTRAL applied to X].
COUPLING_PREFACTOR_EV = math.pi * HBAR_EV_FS * GREEN_TO_SPECTRAL


def to_angular_frequency(energy_ev):
    """Energy in eV -> angular frequency in rad/fs."""
    return np.asarray(energy_ev) / HBAR_EV_FS if np.ndim(energy_ev) else energy_ev / HBAR_EV_FS


def to_energy_ev(omega_rad_fs):
    """Angular frequency in rad/fs -> energy in eV."""
    return omega_rad_fs * HBAR_EV_FS


def wavenumber_nm(energy_ev):
    """Vacuum wavenumber k0 = E/(hbar c) in 1/nm."""
    return energy_ev / (HBAR_EV_FS * C_NM_FS)


@dataclass(frozen=True)
class UnitSystem:
    """Frozen record of the internal unit choices and conversion constants."""

    energy: str = "eV"
    length: str = "nm"
    time: str = "fs"
    dipole: str = "Debye"
    hbar: float = HBAR_EV_FS
    c: float = C_NM_FS
    green_to_spectral: float = GREEN_TO_SPECTRAL
    coupling_prefactor_ev: float = COUPLING_PREFACTOR_EV

    def angular_frequency(self, energy_ev: float) -> float:
        return energy_ev / self.hbar

    def energy_ev(self, omega_rad_fs: float) -> float:
        return omega_rad_fs * self.hbar

    def wavenumber(self, energy_ev: float) -> float:
        return energy_ev / (self.hbar * self.c)


UNITS = UnitSystem()


# ---------------------------------------------------------------------------
# scenario types
# ---------------------------------------------------------------------------

_COINCIDENCE_TOL_NM = 1e-6


@dataclass(frozen=True)
class Emitter:
    """Point two-level emitter.

    Parameters
    ----------
    position_nm : tuple of 3 floats
        Location in nm.  For a half-space environment the transition region
        is z > interface_z.
    energy_ev : float
        Transition energy, > 0.
    dipole_debye : tuple of 3 floats
        Transition dipole vector in Debye; magnitude must be > 0.
    """

    position_nm: tuple[float, float, float]
    energy_ev: float
    dipole_debye: tuple[float, float, float] = (0.0, 0.0, 10.0)

    def __post_init__(self):
        pos = tuple(float(x) for x in self.position_nm)
        dip = tuple(float(x) for x in self.dipole_debye)
        object.__setattr__(self, "position_nm", pos)
        object.__setattr__(self, "dipole_debye", dip)
        object.__setattr__(self, "energy_ev", float(self.energy_ev))
        if not all(math.isfinite(x) for x in pos + dip) or not math.isfinite(self.energy_ev):
            raise SimulationError("emitter parameters must be finite")
        if self.energy_ev <= 0.0:
            raise NonpositiveFrequency(
                f"emitter transition energy must be > 0, got {self.energy_ev}")
        if math.sqrt(sum(x * x for x in dip)) <= 0.0:
            raise SimulationError("emitter dipole magnitude must be > 0")

    @property
    def position(self) -> np.ndarray:
        return np.array(self.position_nm, dtype=float)

    @property
    def dipole(self) -> np.ndarray:
        return np.array(self.dipole_debye, dtype=float)

    @property
    def dipole_magnitude_debye(self) -> float:
        return float(np.linalg.norm(self.dipole_debye))

    @property
    def dipole_unit(self) -> np.ndarray:
        d = self.dipole
        return d / np.linalg.norm(d)


@dataclass(frozen=True)
class Environment:
    """Dielectric environment: free space or a Drude half space below z = interface_z.

    The lower half space (z < interface_z) is a local Drude metal
    eps(omega) = eps_inf - wp^2/(omega^2 + i gamma omega); the upper half space
    is vacuum.
    """

    kind: str = "free_space"
    plasma_energy_ev: float = 0.0
    damping_energy_ev: float = 0.0
    eps_inf: float = 1.0
    interface_z_nm: float = 0.0

    def __post_init__(self):
        if self.kind not in ("free_space", "drude_half_space"):
            raise SimulationError(f"unknown environment kind {self.kind!r}")
        if self.kind == "drude_half_space":
            if self.plasma_energy_ev <= 0.0:
                raise SimulationError("plasma_energy_ev must be > 0 for a Drude half space")
            if self.damping_energy_ev < 0.0:
                raise SimulationError("damping_energy_ev must be >= 0")

    @classmethod
    def free_space(cls) -> "Environment":
        return cls(kind="free_space")

    @classmethod
    def drude_half_space(cls, plasma_energy_ev: float, damping_energy_ev: float,
                         eps_inf: float = 1.0, interface_z_nm: float = 0.0) -> "Environment":
        return cls(kind="drude_half_space", plasma_energy_ev=plasma_energy_ev,
                   damping_energy_ev=damping_energy_ev, eps_inf=eps_inf,
                   interface_z_nm=interface_z_nm)

    @property
    def is_free_space(self) -> bool:
        return self.kind == "free_space"

    def permittivity(self, energy_ev: float, z_nm: float | None = None) -> complex:
        """Relative permittivity at the given energy; vacuum for z above the interface."""
        if energy_ev <= 0.0:
            raise NonpositiveFrequency(f"permittivity requires energy > 0, got {energy_ev}")
        if self.is_free_space:
            return 1.0 + 0.0j
        if z_nm is not None and z_nm > self.interface_z_nm:
            return 1.0 + 0.0j
        w = energy_ev
        return complex(self.eps_inf) - self.plasma_energy_ev ** 2 / (
            w * w + 1j * self.damping_energy_ev * w)


@dataclass(frozen=True)
class Scenario:
    """Validated emitter/environment bundle. Construct via ``validate_scenario``."""

    emitters: tuple[Emitter, ...]
    environment: Environment
    _hash: str = field(default="", repr=False)

    @property
    def n_emitters(self) -> int:
        return len(self.emitters)

    @property
    def positions(self) -> np.ndarray:
        return np.array([e.position_nm for e in self.emitters], dtype=float)

    @property
    def energies_ev(self) -> np.ndarray:
        return np.array([e.energy_ev for e in self.emitters], dtype=float)

    @property
    def dipoles_debye(self) -> np.ndarray:
        return np.array([e.dipole_debye for e in self.emitters], dtype=float)

    @property
    def is_degenerate(self) -> bool:
        e = self.energies_ev
        return bool(np.all(np.abs(e - e[0]) < 1e-12))

    @property
    def degenerate_energy_ev(self) -> float:
        """Common transition energy; raises if the emitters are non-degenerate."""
        if not self.is_degenerate:
            raise NonDegenerateEmitters(
                "emitters do not share a single transition energy")
        return float(self.energies_ev[0])

    def mean_energy_ev(self, alpha: int, beta: int) -> float:
        """Pairwise arithmetic-mean transition energy, used for rate/shift matrices."""
        e = self.energies_ev
        return 0.5 * float(e[alpha] + e[beta])

    @property
    def hash_hex(self) -> str:
        return self._hash


def _scenario_hash(emitters: tuple[Emitter, ...], environment: Environment) -> str:
    parts = []
    for e in emitters:
        parts.append("E:" + ",".join(f"{v:.12e}" for v in
                                     (*e.position_nm, e.energy_ev, *e.dipole_debye)))
    env = environment
    parts.append(f"V:{env.kind},{env.plasma_energy_ev:.12e},{env.damping_energy_ev:.12e},"
                 f"{env.eps_inf:.12e},{env.interface_z_nm:.12e}")
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:12]


def validate_scenario(emitters, environment: Environment) -> Scenario:
    """Check geometry/parameters and return an immutable scenario handle.

    Raises
    ------
    EmitterBelowInterface
        Any emitter with z <= interface_z in a half-space environment.
    CoincidentEmitters
        Two emitters within 1e-6 nm of each other.

    The outcome is independent of emitter ordering.
    """
    emitters = tuple(emitters)
    if not emitters:
        raise SimulationError("scenario needs at least one emitter")
    if environment.kind == "drude_half_space":
        for i, e in enumerate(emitters):
            if e.position_nm[2] <= environment.interface_z_nm:
                raise EmitterBelowInterface(
                    f"emitter {i + 1} at z = {e.position_nm[2]} nm is not above the "
                    f"interface at z = {environment.interface_z_nm} nm")
    for i in range(len(emitters)):
        for j in range(i + 1, len(emitters)):
            d = math.dist(emitters[i].position_nm, emitters[j].position_nm)
            if d < _COINCIDENCE_TOL_NM:
                raise CoincidentEmitters(
                    f"emitters {i + 1} and {j + 1} are {d:.3e} nm apart "
                    f"(< {_COINCIDENCE_TOL_NM} nm)")
    return Scenario(emitters=emitters, environment=environment,
                    _hash=_scenario_hash(emitters, environment))
