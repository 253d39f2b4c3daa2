import json
import math
from dataclasses import (
    dataclass,
    field
)
from enum import Enum
from typing import (
    Any,
    Dict,
    FrozenSet,
    Iterable,
    Mapping
)

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray
)

from errors import (
    DegenerateSpectrumError,
    DomainError,
    TruncationError
)
from special_functions import (
    TRUNCATION_MARGIN_PM,
    bessel_j_range
)

POWER_TOLERANCE = 1e-9
WAVEFORM_SAMPLES = 4096


@dataclass(frozen=True, eq=False)
class SidebandSpectrum:
    """
    Field Ω(t)/Ω₀ = Σₙ aₙ e^{inωt} stored densely for n = -n_max..n_max. `carrier_power_scale`
    is |Ω₀|², so the Raman coupling and the intensity follow from the
    amplitudes without renormalization. Filtering lowers the total power below one.
    """

    amplitudes: NDArray
    mod_frequency: float
    carrier_power_scale: float = 1.0

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=complex)
        if amplitudes.ndim != 1 or amplitudes.size % 2 != 1:
            raise ValueError("amplitudes must be a 1-D array of odd length centred on n = 0")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

        if self.carrier_power_scale <= 0.0:
            raise ValueError(f"carrier_power_scale must be positive, got {self.carrier_power_scale}")
        power = self.total_power
        if power <= 0.0:
            raise DegenerateSpectrumError("spectrum carries no power")
        if power > 1.0 + POWER_TOLERANCE:
            raise ValueError(f"total power {power} exceeds the unfiltered normalization of 1")

    @classmethod
    def from_components(
        cls,
        components: Mapping[int, complex],
        mod_frequency: float,
        carrier_power_scale: float = 1.0,
    ) -> "SidebandSpectrum":
        n_max = max(abs(n) for n in components)
        amplitudes = np.zeros(2 * n_max + 1, dtype=complex)
        for n, a in components.items():
            amplitudes[n + n_max] = a
        return cls(amplitudes, mod_frequency, carrier_power_scale)

    @property
    def n_max(self) -> int:
        return (self.amplitudes.size - 1) // 2

    @property
    def indices(self) -> NDArray:
        return np.arange(-self.n_max, self.n_max + 1)

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def beat_period(self) -> float:
        return 2.0 * math.pi / self.mod_frequency

    def amplitude(self, n: int) -> complex:
        if abs(n) > self.n_max:
            return 0j
        return complex(self.amplitudes[n + self.n_max])

    def replace(self, amplitudes: ArrayLike) -> "SidebandSpectrum":
        return SidebandSpectrum(amplitudes, self.mod_frequency, self.carrier_power_scale)

    def with_power_scale(self, carrier_power_scale: float) -> "SidebandSpectrum":
        return SidebandSpectrum(self.amplitudes, self.mod_frequency, carrier_power_scale)

    def to_json(self) -> Dict[str, Any]:
        return {
            "mod_frequency_rad_s": self.mod_frequency,
            "carrier_power_scale": self.carrier_power_scale,
            "amplitudes": [[int(n), float(a.real), float(a.imag)] for n, a in zip(self.indices, self.amplitudes)],
        }

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "SidebandSpectrum":
        components = {int(n): complex(re, im) for n, re, im in obj["amplitudes"]}
        return cls.from_components(
            components,
            mod_frequency=float(obj["mod_frequency_rad_s"]),
            carrier_power_scale=float(obj["carrier_power_scale"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


class FilterKinds(Enum):
    REMOVE_CARRIER = "remove_carrier"
    REMOVE_ODD_SIDEBANDS = "remove_odd_sidebands"
    KEEP_INDICES = "keep_indices"


@dataclass(frozen=True)
class FilterKind:
    kind: FilterKinds
    keep: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.kind is FilterKinds.KEEP_INDICES and len(self.keep) == 0:
            raise ValueError("KeepIndices filter needs at least one index")

    @classmethod
    def remove_carrier(cls) -> "FilterKind":
        return cls(FilterKinds.REMOVE_CARRIER)

    @classmethod
    def remove_odd_sidebands(cls) -> "FilterKind":
        return cls(FilterKinds.REMOVE_ODD_SIDEBANDS)

    @classmethod
    def keep_indices(cls, indices: Iterable[int]) -> "FilterKind":
        return cls(FilterKinds.KEEP_INDICES, frozenset(int(n) for n in indices))

    def passes(self, indices: NDArray) -> NDArray:
        if self.kind is FilterKinds.REMOVE_CARRIER:
            return indices != 0
        elif self.kind is FilterKinds.REMOVE_ODD_SIDEBANDS:
            return indices % 2 == 0
        elif self.kind is FilterKinds.KEEP_INDICES:
            return np.isin(indices, sorted(self.keep))
        else:
            raise ValueError(f"Cannot apply {self.__class__.__name__} of type `{self.kind}`")


def phase_modulate(
    beta: float,
    mod_frequency: float,
    trunc: int,
    carrier_power_scale: float = 1.0,
) -> SidebandSpectrum:
    """Jacobi-Anger sidebands aₙ = Jₙ(β) of a pure phase modulation."""
    if not 0.0 <= beta <= 2.0 * math.pi:
        raise DomainError(f"modulation depth must lie in [0, 2π], got {beta}")
    minimum = int(math.ceil(beta)) + TRUNCATION_MARGIN_PM
    if trunc < minimum:
        raise TruncationError(f"truncation order {trunc} is below the minimum {minimum} for β = {beta}")
    return SidebandSpectrum(bessel_j_range(trunc, beta), mod_frequency, carrier_power_scale)


def apply_quadratic_phase(spec: SidebandSpectrum, alpha: float) -> SidebandSpectrum:
    n = spec.indices
    return spec.replace(spec.amplitudes * np.exp(1j * alpha * n * n))


def apply_filter(spec: SidebandSpectrum, filter: FilterKind) -> SidebandSpectrum:
    amplitudes = np.where(filter.passes(spec.indices), spec.amplitudes, 0j)
    if not np.any(np.abs(amplitudes) > 0.0):
        raise DegenerateSpectrumError(f"filter `{filter.kind.value}` removes every component")
    return spec.replace(amplitudes)


def mach_zehnder_output(spec: SidebandSpectrum, bias: float) -> SidebandSpectrum:
    """
    Field at one port of a balanced Mach-Zehnder modulator: ½(E_ref − e^{i·bias} E_mod), with the
    unmodulated reference arm at n = 0. Its intensity is ½(1 − cos φ(t)).
    """
    amplitudes = -0.5 * np.exp(1j * bias) * spec.amplitudes
    amplitudes = amplitudes.copy()
    amplitudes[spec.n_max] += 0.5
    return spec.replace(amplitudes)


def overlap(spec: SidebandSpectrum, k: int) -> complex:
    """Σₙ aₙ* aₙ₊ₖ, the coefficient of e^{ikωt} in |Ω(t)/Ω₀|²."""
    a = spec.amplitudes
    if k == 0:
        return complex(np.vdot(a, a))
    if abs(k) >= a.size:
        return 0j
    if k > 0:
        return complex(np.vdot(a[:-k], a[k:]))
    return complex(np.vdot(a[-k:], a[:k]))


def am_efficiency(spec: SidebandSpectrum, k: int = 1) -> float:
    if k < 1:
        raise ValueError(f"amplitude modulation order must be >= 1, got {k}")
    return abs(overlap(spec, k)) / spec.total_power


def beat_time_grid(spec: SidebandSpectrum, samples: int = WAVEFORM_SAMPLES, periods: int = 1) -> NDArray:
    return np.arange(samples * periods) * (spec.beat_period / samples)


def field_waveform(spec: SidebandSpectrum, times: ArrayLike) -> NDArray:
    """Ω(t)/Ω₀ sampled at `times`."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    phases = np.exp(1j * spec.mod_frequency * np.outer(times, spec.indices))
    return phases @ spec.amplitudes


def intensity_waveform(spec: SidebandSpectrum, times: ArrayLike) -> NDArray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise ValueError("time grid must not be empty")
    return np.abs(field_waveform(spec, times)) ** 2 * spec.carrier_power_scale


def harmonic_coefficient(waveform: ArrayLike, k: int) -> complex:
    """k-th complex Fourier coefficient of a waveform sampled uniformly over whole periods."""
    waveform = np.asarray(waveform)
    return complex(np.fft.fft(waveform)[k] / waveform.size)


__all__ = [
    "FilterKind",
    "FilterKinds",
    "SidebandSpectrum",
    "am_efficiency",
    "apply_filter",
    "apply_quadratic_phase",
    "beat_time_grid",
    "field_waveform",
    "harmonic_coefficient",
    "intensity_waveform",
    "mach_zehnder_output",
    "overlap",
    "phase_modulate",
]
