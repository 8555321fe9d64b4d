"""Back-action cooling of a micromechanical resonator coupled to a driven
transmission-line resonator, in the linearized quantum Langevin picture."""

from .params import (
    BathOccupations,
    DriveParams,
    HardwareParams,
    InvalidParameterError,
    SystemParams,
    derive_coupling,
    drive_from_power,
    thermal_occupations,
    to_natural_units,
    to_si_units,
)
from .steady import WorkingPoint, cavity_amplitude, solve_working_point
from .stability import DriftMatrix, drift_matrix, is_stable
from .cooling import CoolingReport, Tolerances, evaluate_point

__version__ = "0.1.0"

__all__ = [
    "BathOccupations",
    "CoolingReport",
    "DriftMatrix",
    "DriveParams",
    "HardwareParams",
    "InvalidParameterError",
    "SystemParams",
    "Tolerances",
    "WorkingPoint",
    "cavity_amplitude",
    "derive_coupling",
    "drift_matrix",
    "drive_from_power",
    "evaluate_point",
    "is_stable",
    "solve_working_point",
    "thermal_occupations",
    "to_natural_units",
    "to_si_units",
]
