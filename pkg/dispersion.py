import math
from dataclasses import dataclass
from enum import Enum
from typing import (
    List,
    NamedTuple,
    Sequence,
    Tuple
)

import numpy as np

from conversion import required_beta_for_optimum
from errors import (
    DomainError,
    SingularityError
)
from export import write_csv
from spectrum import (
    FilterKind,
    SidebandSpectrum,
    apply_filter,
    apply_quadratic_phase
)

FS2_TO_S2 = 1e-30
SPEED_OF_LIGHT = 299792458.0
LASER_WAVELENGTH = 795e-9
QUBIT_FREQUENCY_RB87 = 2.0 * math.pi * 6.8e9

FIBER_GDD_PER_METER_FS2 = 4e4
FIBER_ATTENUATION_DB_PER_KM = 4.0
CBG_GDD_FS2 = 4e8
CBG_BANDWIDTH = 2.0 * math.pi * 50e9
BROADBAND = 2.0 * math.pi * 10e12


class DispersiveElements(Enum):
    CBG = "cbg"
    CBG_DOUBLE_BOUNCE = "cbg_double_bounce"
    FIBER_10M = "fiber_10m"
    FIBER_20KM = "fiber_20km"
    CHIRPED_MIRROR = "chirped_mirror"
    CHIRPED_MIRROR_BEST = "chirped_mirror_best"


@dataclass(frozen=True)
class DispersiveElement:
    """
    Element imprinting a quadratic spectral phase with group-delay dispersion `gdd_fs2` over a
    hard reflectivity window of full width `bandwidth` (rad/s). `center_offset` is the laser
    frequency minus the window centre.
    """

    gdd_fs2: float
    bandwidth: float
    center_offset: float = 0.0
    label: str = ""
    attenuation_db: float = 0.0

    def __post_init__(self) -> None:
        if self.gdd_fs2 == 0.0 or not math.isfinite(self.gdd_fs2):
            raise DomainError(f"group-delay dispersion must be finite and non-zero, got {self.gdd_fs2}")
        if self.bandwidth <= 0.0:
            raise DomainError(f"bandwidth must be positive, got {self.bandwidth}")

    @property
    def transmission(self) -> float:
        return 10.0 ** (-self.attenuation_db / 10.0)

    @classmethod
    def create(cls, x: DispersiveElements, center_offset: float = 0.0) -> "DispersiveElement":
        if x is DispersiveElements.CBG:
            return cls(CBG_GDD_FS2, CBG_BANDWIDTH, center_offset, x.value)
        elif x is DispersiveElements.CBG_DOUBLE_BOUNCE:
            return cls(2.0 * CBG_GDD_FS2, CBG_BANDWIDTH, center_offset, x.value)
        elif x is DispersiveElements.FIBER_10M:
            return fiber(10.0, center_offset=center_offset, label=x.value)
        elif x is DispersiveElements.FIBER_20KM:
            return fiber(20e3, center_offset=center_offset, label=x.value)
        elif x is DispersiveElements.CHIRPED_MIRROR:
            return cls(1300.0, BROADBAND, center_offset, x.value)
        elif x is DispersiveElements.CHIRPED_MIRROR_BEST:
            return cls(2000.0, BROADBAND, center_offset, x.value)
        else:
            raise ValueError(f"Cannot create {cls.__name__} of type `{x}`")


class Curvature(NamedTuple):
    alpha: float
    unwrapped: float
    wraps: int


def fiber(
    length_m: float,
    gdd_per_meter_fs2: float = FIBER_GDD_PER_METER_FS2,
    center_offset: float = 0.0,
    label: str = "fiber",
) -> DispersiveElement:
    if length_m <= 0.0:
        raise DomainError(f"fiber length must be positive, got {length_m}")
    return DispersiveElement(
        gdd_fs2=length_m * gdd_per_meter_fs2,
        bandwidth=BROADBAND,
        center_offset=center_offset,
        label=label,
        attenuation_db=FIBER_ATTENUATION_DB_PER_KM * length_m / 1e3,
    )


def gvd_to_gdd_per_meter(gvd_ps_nm_km: float, wavelength: float = LASER_WAVELENGTH) -> float:
    """
    Dispersion parameter D (ps/nm/km) to GDD per unit length (fs²/m). Normal dispersion has
    negative D and positive GDD.
    """
    d_si = gvd_ps_nm_km * 1e-12 / (1e-9 * 1e3)
    return -d_si * wavelength * wavelength / (2.0 * math.pi * SPEED_OF_LIGHT) / FS2_TO_S2


def gdd_per_meter_to_gvd(gdd_fs2_per_m: float, wavelength: float = LASER_WAVELENGTH) -> float:
    d_si = -gdd_fs2_per_m * FS2_TO_S2 * 2.0 * math.pi * SPEED_OF_LIGHT / (wavelength * wavelength)
    return d_si / (1e-12 / (1e-9 * 1e3))


def fiber_length_for_gdd(gdd_fs2: float, gdd_per_meter_fs2: float = FIBER_GDD_PER_METER_FS2) -> float:
    return gdd_fs2 / gdd_per_meter_fs2


def alpha_from_gdd(element: DispersiveElement, qubit_frequency: float, reflections: int = 1) -> Curvature:
    """
    Per-sideband phase curvature α = reflections · GDD · ω_q² / 2. The amplitude modulation
    depends on α only through sin α, so the value is also reported modulo π with its wrap count.
    """
    if qubit_frequency <= 0.0:
        raise DomainError(f"qubit frequency must be positive, got {qubit_frequency}")
    if reflections < 1:
        raise DomainError(f"reflections must be >= 1, got {reflections}")

    unwrapped = reflections * element.gdd_fs2 * FS2_TO_S2 * qubit_frequency * qubit_frequency / 2.0
    wraps = int(math.floor(unwrapped / math.pi))
    return Curvature(alpha=unwrapped - wraps * math.pi, unwrapped=unwrapped, wraps=wraps)


def reflect(spec: SidebandSpectrum, element: DispersiveElement, reflections: int = 1) -> SidebandSpectrum:
    """
    Drops sidebands outside the reflectivity window, attenuates the rest by the element's
    transmission and applies the quadratic phase at the spectrum's own sideband spacing. Both
    losses show up as a lower total power.
    """
    offsets = spec.indices * spec.mod_frequency + element.center_offset
    inside = spec.indices[np.abs(offsets) <= element.bandwidth / 2.0]
    windowed = apply_filter(spec, FilterKind.keep_indices(inside.tolist()))
    windowed = windowed.replace(windowed.amplitudes * math.sqrt(element.transmission))
    curvature = alpha_from_gdd(element, spec.mod_frequency, reflections)
    return apply_quadratic_phase(windowed, curvature.alpha)


@dataclass(frozen=True)
class Fig1eRow:
    label: str
    gdd_fs2: float
    alpha: float
    required_beta: float
    reachable: bool


def fig1e_dataset(
    elements: Sequence[DispersiveElement],
    qubit_frequency: float = QUBIT_FREQUENCY_RB87,
    beta_limit: float = math.pi,
) -> List[Fig1eRow]:
    if len(elements) == 0:
        raise ValueError("need at least one dispersive element")

    rows = []
    for element in elements:
        curvature = alpha_from_gdd(element, qubit_frequency)
        try:
            required = required_beta_for_optimum(curvature.alpha)
        except SingularityError:
            required = math.inf
        rows.append(
            Fig1eRow(
                label=element.label,
                gdd_fs2=element.gdd_fs2,
                alpha=curvature.alpha,
                required_beta=required,
                reachable=required <= beta_limit,
            )
        )
    return rows


def catalogue() -> List[DispersiveElement]:
    return [DispersiveElement.create(x) for x in DispersiveElements]


def write_fig1e_csv(path: str, rows: Sequence[Fig1eRow]) -> None:
    write_csv(
        path,
        ["label", "gdd_fs2", "alpha_rad", "required_beta_rad", "reachable"],
        ([r.label, r.gdd_fs2, r.alpha, r.required_beta, r.reachable] for r in rows),
    )


def gdd_for_alpha(alpha: float, qubit_frequency: float) -> Tuple[float, float]:
    """GDD (fs²) giving curvature α in one reflection, and the matching 4 dB/km fiber loss in dB."""
    gdd = 2.0 * alpha / (qubit_frequency * qubit_frequency) / FS2_TO_S2
    return gdd, FIBER_ATTENUATION_DB_PER_KM * fiber_length_for_gdd(gdd) / 1e3


__all__ = [
    "Curvature",
    "DispersiveElement",
    "DispersiveElements",
    "Fig1eRow",
    "QUBIT_FREQUENCY_RB87",
    "alpha_from_gdd",
    "catalogue",
    "fiber",
    "fiber_length_for_gdd",
    "fig1e_dataset",
    "gdd_for_alpha",
    "gdd_per_meter_to_gvd",
    "gvd_to_gdd_per_meter",
    "reflect",
    "write_fig1e_csv",
]
