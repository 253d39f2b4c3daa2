"""
Vector light shift of an off-resonant beam expressed as a fictitious magnetic field along
Im[ε* × ε], with the two fine-structure lines interfering through their detunings.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray
)

from errors import SingularityError

# μ_B g_J prefactor in internal units; see `to_physical_units`
MU_B_G_J = 1.0
NORM_TOLERANCE = 1e-12
ZERO_FIELD = 1e-12
ANGLE_TOLERANCE = 1e-6


class TransitionClasses(Enum):
    PI = "pi"
    SIGMA = "sigma"
    MIXED = "mixed"
    NONE = "none"


class Handedness(Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True, eq=False)
class PolarizationVector:
    jones: NDArray

    def __post_init__(self) -> None:
        jones = np.array(self.jones, dtype=complex)
        if jones.shape != (3,):
            raise ValueError(f"Jones vector must have three components, got shape {jones.shape}")
        norm = np.linalg.norm(jones)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"Jones vector must have unit norm, got {norm}")
        jones.setflags(write=False)
        object.__setattr__(self, "jones", jones)

    @classmethod
    def of(cls, components: ArrayLike) -> "PolarizationVector":
        jones = np.asarray(components, dtype=complex)
        norm = np.linalg.norm(jones)
        if norm == 0.0:
            raise ValueError("Jones vector must not vanish")
        return cls(jones / norm)

    def conjugate(self) -> "PolarizationVector":
        return PolarizationVector(self.jones.conj())

    def with_phase(self, theta: float) -> "PolarizationVector":
        return PolarizationVector(self.jones * np.exp(1j * theta))


def _unit(v: ArrayLike) -> NDArray:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if v.shape != (3,) or norm == 0.0:
        raise ValueError("expected a non-zero real 3-vector")
    return v / norm


def circular(axis: ArrayLike, handedness: Handedness = Handedness.LEFT) -> PolarizationVector:
    """Circular polarization whose Im[ε* × ε] points along +axis (LEFT) or −axis (RIGHT)."""
    axis = _unit(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = _unit(np.cross(helper, axis))
    e2 = np.cross(axis, e1)
    sign = 1.0 if handedness is Handedness.LEFT else -1.0
    return PolarizationVector((e1 + 1j * sign * e2) / math.sqrt(2.0))


def linear(direction: ArrayLike) -> PolarizationVector:
    return PolarizationVector(_unit(direction).astype(complex))


@dataclass(frozen=True)
class FictitiousField:
    direction: NDArray
    magnitude_scale: float
    detuning_factor: float

    @property
    def vector(self) -> NDArray:
        return self.direction * self.magnitude_scale

    @property
    def is_zero(self) -> bool:
        return not np.any(self.direction) or self.magnitude_scale == 0.0


def detuning_interference(omega: float, d1: float, d2: float) -> float:
    """1/(ω_D2 − ω) − 1/(ω_D1 − ω); between the lines both pathways add."""
    if omega == d1 or omega == d2:
        raise SingularityError(f"laser frequency {omega} is resonant with a fine-structure line")
    return 1.0 / (d2 - omega) - 1.0 / (d1 - omega)


def fictitious_field(eps: PolarizationVector, intensity: float, laser_freq: float, d1: float, d2: float) -> FictitiousField:
    factor = detuning_interference(laser_freq, d1, d2)
    axial = np.imag(np.cross(eps.jones.conj(), eps.jones))
    strength = float(np.linalg.norm(axial))
    if strength < ZERO_FIELD:
        return FictitiousField(direction=np.zeros(3), magnitude_scale=0.0, detuning_factor=factor)
    return FictitiousField(
        direction=axial / strength,
        magnitude_scale=MU_B_G_J * intensity * strength * factor,
        detuning_factor=factor,
    )


def to_physical_units(field: FictitiousField, scale: float) -> FictitiousField:
    """Rescales the internal unit prefactor to a calibrated μ_B g_J dipole constant."""
    return FictitiousField(field.direction, field.magnitude_scale * scale, field.detuning_factor)


def transition_class(field: FictitiousField, quantization_axis: Sequence[float]) -> TransitionClasses:
    if field.is_zero:
        return TransitionClasses.NONE
    axis = np.asarray(quantization_axis, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
        raise ValueError("quantization axis must be a unit vector")

    angle = math.acos(min(1.0, abs(float(np.dot(field.direction, axis)))))
    if angle < ANGLE_TOLERANCE:
        return TransitionClasses.PI
    if abs(angle - math.pi / 2.0) < ANGLE_TOLERANCE:
        return TransitionClasses.SIGMA
    return TransitionClasses.MIXED


__all__ = [
    "FictitiousField",
    "Handedness",
    "MU_B_G_J",
    "PolarizationVector",
    "TransitionClasses",
    "circular",
    "detuning_interference",
    "fictitious_field",
    "linear",
    "to_physical_units",
    "transition_class",
]
