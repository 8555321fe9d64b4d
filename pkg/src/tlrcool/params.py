"""Physical parameters, unit handling and hardware-derived quantities.

Two unit systems are supported.  ``"si"`` carries kg, rad/s, K and
rad/(s m); ``"natural"`` sets hbar = k_B = m = omega_b = 1, so lengths are
measured in sqrt(hbar / (m omega_b)), rates in omega_b and temperatures in
hbar omega_b / k_B.  Every formula in the package is written with explicit
hbar, k_B and m taken from :class:`SystemParams`, so it is valid in either
system; the numerical pipeline runs in natural units.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants

HBAR_SI = constants.hbar
KB_SI = constants.k

UNIT_SYSTEMS = ("natural", "si")

# omega_b << omega_a is assumed by the rotating-frame Hamiltonian.
ADIABATIC_RATIO_WARN = 0.01
# |epsilon| << omega_a is assumed by the rotating-wave approximation.
RWA_RATIO_WARN = 0.25


class InvalidParameterError(ValueError):
    """A physical parameter lies outside its admissible range."""


class ModelValidityWarning(UserWarning):
    """An approximation underlying the model is stretched."""


@dataclass(frozen=True)
class SystemParams:
    """Static parameters of the resonator pair and its baths.

    ``omega_a`` is the coupling-shifted cavity frequency.  ``g0`` is the
    capacitive coupling constant (rad/(s m) in SI).  Both baths share
    ``temperature`` unless ``cavity_temperature`` overrides the one seen by
    the cavity input noise.  ``reference`` holds the SI ``(m, omega_b)`` a
    natural-unit set was scaled by, when known.
    """

    m: float = 1.0
    omega_b: float = 1.0
    gamma_b: float = 2.5e-5
    omega_a: float = 2.0e4
    kappa: float = 1.0
    g0: float = 3.0e-5
    temperature: float = 6.0e3
    cavity_temperature: float | None = None
    units: str = "natural"
    reference: tuple[float, float] | None = None

    def __post_init__(self):
        if self.units not in UNIT_SYSTEMS:
            raise InvalidParameterError(f"unknown unit system {self.units!r}")
        for name in ("m", "omega_b", "kappa"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be positive, got {value!r}")
        for name in ("gamma_b", "temperature", "omega_a"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidParameterError(f"{name} must be non-negative, got {value!r}")
        if self.cavity_temperature is not None and not self.cavity_temperature >= 0:
            raise InvalidParameterError("cavity_temperature must be non-negative")
        if not math.isfinite(self.g0):
            raise InvalidParameterError("g0 must be finite")
        if self.omega_a > 0 and self.omega_b / self.omega_a > ADIABATIC_RATIO_WARN:
            warnings.warn(
                f"omega_b/omega_a = {self.omega_b / self.omega_a:.3g} is not small",
                ModelValidityWarning,
                stacklevel=3,
            )

    @property
    def hbar(self) -> float:
        return HBAR_SI if self.units == "si" else 1.0

    @property
    def k_B(self) -> float:
        return KB_SI if self.units == "si" else 1.0

    @property
    def t_cav(self) -> float:
        return self.temperature if self.cavity_temperature is None else self.cavity_temperature

    @property
    def q_b(self) -> float:
        return self.omega_b / self.gamma_b if self.gamma_b > 0 else math.inf

    @property
    def length_unit(self) -> float:
        """Zero-point length scale sqrt(hbar / (m omega_b))."""
        return math.sqrt(self.hbar / (self.m * self.omega_b))

    def occupations(self) -> BathOccupations:
        n_cav = bose_occupation(self.hbar * self.omega_a, self.k_B * self.t_cav)
        n_mech = bose_occupation(self.hbar * self.omega_b, self.k_B * self.temperature)
        return BathOccupations(n_cav=n_cav, n_mech=n_mech)

    def replace(self, **changes) -> SystemParams:
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class DriveParams:
    """Cavity drive: complex amplitude ``epsilon`` (rad/s) and the bare
    detuning ``delta0`` = omega_a - omega_d, if prescribed."""

    epsilon: complex = 2.5e3
    delta0: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.epsilon):
            raise InvalidParameterError("epsilon must be finite")
        if self.delta0 is not None and not math.isfinite(self.delta0):
            raise InvalidParameterError("delta0 must be finite")

    def rwa_ok(self, omega_a: float) -> bool:
        return abs(self.epsilon) < RWA_RATIO_WARN * omega_a


@dataclass(frozen=True)
class HardwareParams:
    """Circuit-level description (SI): rest capacitance ``cg0`` of the
    mechanical capacitor, rest gap ``d``, resonator ``ca`` and ``la`` and the
    drive ``power``."""

    cg0: float
    d: float
    ca: float
    la: float
    power: float = 0.0

    def __post_init__(self):
        for name in ("d", "ca", "la"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.cg0 < 0 or self.power < 0:
            raise InvalidParameterError("cg0 and power must be non-negative")

    @property
    def omega_a_bare(self) -> float:
        return 1.0 / math.sqrt(self.la * self.ca)

    @property
    def v_rms(self) -> float:
        return math.sqrt(HBAR_SI * self.omega_a_bare / self.ca)

    @property
    def frequency_shift(self) -> float:
        """Cavity pull C_g0 V_rms^2 / hbar, so omega_a = omega_a' + shift."""
        return self.cg0 * self.v_rms**2 / HBAR_SI

    @property
    def omega_a(self) -> float:
        return self.omega_a_bare + self.frequency_shift


@dataclass(frozen=True)
class BathOccupations:
    n_cav: float
    n_mech: float


def bose_occupation(energy, thermal_energy):
    """1/(exp(E/kT) - 1), with kT = 0 mapped to 0 and no overflow."""
    energy = np.asarray(energy, dtype=float)
    thermal_energy = np.asarray(thermal_energy, dtype=float)
    hot = thermal_energy > 0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        n = np.where(hot, 1.0 / np.expm1(energy / np.where(hot, thermal_energy, 1.0)), 0.0)
    return float(n) if n.ndim == 0 else n


def thermal_occupations(temperature, omega_a, omega_b, *, hbar=HBAR_SI, k_B=KB_SI) -> BathOccupations:
    """Thermal photon number N of the cavity and phonon number n_b of the
    mechanical mode at ``temperature``.  SI by default."""
    if temperature < 0:
        raise InvalidParameterError("temperature must be non-negative")
    return BathOccupations(
        n_cav=bose_occupation(hbar * omega_a, k_B * temperature),
        n_mech=bose_occupation(hbar * omega_b, k_B * temperature),
    )


def to_natural_units(params: SystemParams) -> SystemParams:
    """Rescale an SI parameter set so that hbar = k_B = m = omega_b = 1."""
    if params.units == "natural":
        return params
    m, wb = params.m, params.omega_b
    energy = HBAR_SI * wb
    return SystemParams(
        m=1.0,
        omega_b=1.0,
        gamma_b=params.gamma_b / wb,
        omega_a=params.omega_a / wb,
        kappa=params.kappa / wb,
        g0=params.g0 * params.length_unit / wb,
        temperature=KB_SI * params.temperature / energy,
        cavity_temperature=None
        if params.cavity_temperature is None
        else KB_SI * params.cavity_temperature / energy,
        units="natural",
        reference=(m, wb),
    )


def to_si_units(params: SystemParams, m: float | None = None, omega_b: float | None = None) -> SystemParams:
    """Inverse of :func:`to_natural_units`; the SI mass and frequency default
    to ``params.reference``."""
    if params.units == "si":
        return params
    if m is None or omega_b is None:
        if params.reference is None:
            raise InvalidParameterError("SI reference (m, omega_b) is required")
        m, omega_b = params.reference
    if not (m > 0 and omega_b > 0):
        raise InvalidParameterError("SI reference mass and frequency must be positive")
    length = math.sqrt(HBAR_SI / (m * omega_b))
    temp = HBAR_SI * omega_b / KB_SI
    return SystemParams(
        m=m,
        omega_b=omega_b,
        gamma_b=params.gamma_b * omega_b,
        omega_a=params.omega_a * omega_b,
        kappa=params.kappa * omega_b,
        g0=params.g0 * omega_b / length,
        temperature=params.temperature * temp,
        cavity_temperature=None if params.cavity_temperature is None else params.cavity_temperature * temp,
        units="si",
    )


def drive_to_natural(drive: DriveParams, omega_b: float) -> DriveParams:
    return DriveParams(
        epsilon=drive.epsilon / omega_b,
        delta0=None if drive.delta0 is None else drive.delta0 / omega_b,
    )


def derive_coupling(hw: HardwareParams) -> float:
    """g0 = C_g0 V_rms^2 / (hbar d) = C_g0 omega_a' / (C_a d), in rad/(s m)."""
    return hw.cg0 * hw.omega_a_bare / (hw.ca * hw.d)


def drive_from_power(power: float, kappa: float, omega_a_bare: float) -> float:
    """Drive strength |epsilon| = sqrt(2 kappa P / (hbar omega_a'))."""
    if power < 0 or kappa < 0 or not omega_a_bare > 0:
        raise InvalidParameterError("power, kappa must be >= 0 and omega_a' > 0")
    return math.sqrt(2.0 * kappa * power / (HBAR_SI * omega_a_bare))
