"""
Experiment configuration. A JSON document maps onto a tree of dataclasses; every key is
optional and unknown keys are rejected with their dotted path. Keys ending in `_hz` hold
ordinary frequencies and are exposed as angular frequencies by the section properties.
"""

import json
import math
import os
import typing
from dataclasses import (
    asdict,
    dataclass,
    field,
    fields,
    is_dataclass
)
from enum import Enum
from typing import (
    Any,
    Dict,
    List,
    Mapping,
    Optional
)

from conversion import ConversionMethods
from dispersion import DispersiveElements
from errors import ConfigurationError
from pulse_sequences import (
    Closers,
    DetuningDistributions
)

SCHEMA_VERSION = 1
OUT_DIR_ENV = "RAMANFORGE_OUT_DIR"
DEFAULT_OUT_DIR = "results"
TWO_PI = 2.0 * math.pi


class Simulations(Enum):
    RABI = "rabi"
    RAMSEY = "ramsey"
    CPMG = "cpmg"
    XY16 = "xy16"
    ENSEMBLE = "ensemble"
    FIG1E = "fig1e"
    LIGHTSHIFT = "lightshift"


@dataclass
class SpectrumConfig:
    beta_rad: float = 1.336
    qubit_frequency_hz: float = 6.8e9

    @property
    def qubit_frequency(self) -> float:
        return TWO_PI * self.qubit_frequency_hz

    def validate(self) -> None:
        if not 0.0 <= self.beta_rad <= TWO_PI:
            raise ConfigurationError(f"must lie in [0, 2π], got {self.beta_rad}", "spectrum.beta_rad")
        if self.qubit_frequency_hz <= 0.0:
            raise ConfigurationError(f"must be positive, got {self.qubit_frequency_hz}", "spectrum.qubit_frequency_hz")


@dataclass
class MethodConfig:
    name: str = "dispersive"
    alpha_rad: float = 0.76
    order: int = 1
    element: Optional[str] = None
    reflections: int = 1
    center_offset_hz: float = 0.0

    @property
    def center_offset(self) -> float:
        return TWO_PI * self.center_offset_hz

    def validate(self) -> None:
        _check_choice(self.name, ConversionMethods, "method.name")
        if self.element is not None:
            _check_choice(self.element, DispersiveElements, "method.element")
            if self.name != ConversionMethods.DISPERSIVE.value:
                raise ConfigurationError(f"needs the `dispersive` method, got `{self.name}`", "method.element")
        if self.order < 1:
            raise ConfigurationError(f"must be >= 1, got {self.order}", "method.order")
        if self.reflections < 1:
            raise ConfigurationError(f"must be >= 1, got {self.reflections}", "method.reflections")


@dataclass
class DynamicsConfig:
    model: str = "tls"
    detuning_hz: float = 1e12
    carrier_rabi_hz: float = 2.6e9
    linewidth_hz: float = 5.75e6
    duration_s: float = 2e-6
    samples: int = 200

    @property
    def detuning(self) -> float:
        return TWO_PI * self.detuning_hz

    @property
    def carrier_power_scale(self) -> float:
        return (TWO_PI * self.carrier_rabi_hz) ** 2

    @property
    def linewidth(self) -> float:
        return TWO_PI * self.linewidth_hz

    def validate(self) -> None:
        if self.model not in ("tls", "three_level"):
            raise ConfigurationError(f"must be `tls` or `three_level`, got `{self.model}`", "dynamics.model")
        if self.detuning_hz == 0.0:
            raise ConfigurationError("must be non-zero", "dynamics.detuning_hz")
        if self.carrier_rabi_hz <= 0.0:
            raise ConfigurationError(f"must be positive, got {self.carrier_rabi_hz}", "dynamics.carrier_rabi_hz")
        if self.duration_s <= 0.0:
            raise ConfigurationError(f"must be positive, got {self.duration_s}", "dynamics.duration_s")
        if self.samples < 5:
            raise ConfigurationError(f"must be >= 5, got {self.samples}", "dynamics.samples")


@dataclass
class NoiseConfig:
    scatter_prob: float = 0.0
    detuning_kind: str = "delta"
    detuning_mean_hz: float = 0.0
    detuning_sigma_hz: float = 0.0
    amplitude_error: float = 0.0
    idle_t1_s: Optional[float] = None

    def validate(self) -> None:
        _check_choice(self.detuning_kind, DetuningDistributions, "noise.detuning_kind")
        if not 0.0 <= self.scatter_prob < 1.0:
            raise ConfigurationError(f"must lie in [0, 1), got {self.scatter_prob}", "noise.scatter_prob")
        if self.idle_t1_s is not None and self.idle_t1_s <= 0.0:
            raise ConfigurationError(f"must be positive, got {self.idle_t1_s}", "noise.idle_t1_s")


@dataclass
class SequenceConfig:
    pi_time_s: float = 256e-9
    gap_s: float = 1e-6
    closer: str = "return"
    counts: List[int] = field(default_factory=lambda: [1, 2, 4, 8, 16])
    gaps_s: List[float] = field(default_factory=lambda: [i * 1e-4 for i in range(31)])
    shots: int = 2000

    def validate(self) -> None:
        _check_choice(self.closer, Closers, "sequence.closer")
        if self.pi_time_s <= 0.0:
            raise ConfigurationError(f"must be positive, got {self.pi_time_s}", "sequence.pi_time_s")
        if self.gap_s < 0.0:
            raise ConfigurationError(f"must be non-negative, got {self.gap_s}", "sequence.gap_s")
        if len(self.counts) == 0 or any(n < 1 for n in self.counts):
            raise ConfigurationError("must be a non-empty list of counts >= 1", "sequence.counts")
        if len(self.gaps_s) == 0 or any(g < 0.0 for g in self.gaps_s):
            raise ConfigurationError("must be a non-empty list of non-negative gaps", "sequence.gaps_s")
        if self.shots < 1:
            raise ConfigurationError(f"must be >= 1, got {self.shots}", "sequence.shots")


@dataclass
class ArrayConfig:
    rows: int = 20
    cols: int = 30
    extent_x_m: float = 100e-6
    extent_y_m: float = 200e-6
    waist_minor_m: float = 40e-6
    waist_major_m: float = 560e-6
    rabi_hz: float = 1.95e6
    selected_rows: Optional[List[int]] = None
    duration_s: float = 3e-6
    samples: int = 400
    fill_probability: float = 1.0
    power_noise: float = 0.0

    @property
    def rabi(self) -> float:
        return TWO_PI * self.rabi_hz

    def validate(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ConfigurationError("array needs at least one site", "array.rows")
        if self.waist_minor_m <= 0.0 or self.waist_major_m <= 0.0:
            raise ConfigurationError("waists must be positive", "array.waist_minor_m")
        if not 0.0 <= self.fill_probability <= 1.0:
            raise ConfigurationError(f"must lie in [0, 1], got {self.fill_probability}", "array.fill_probability")
        if self.selected_rows is not None and any(not 0 <= r < self.rows for r in self.selected_rows):
            raise ConfigurationError(f"rows must lie in 0..{self.rows - 1}", "array.selected_rows")


@dataclass
class LightShiftConfig:
    polarization: str = "circular_z"
    intensity: float = 1.0
    laser_hz: float = 377.2e12
    d1_hz: float = 377.107e12
    d2_hz: float = 384.230e12
    quantization_axis: List[float] = field(default_factory=lambda: [0.0, 0.0, 1.0])

    @property
    def laser_frequency(self) -> float:
        return TWO_PI * self.laser_hz

    @property
    def d1(self) -> float:
        return TWO_PI * self.d1_hz

    @property
    def d2(self) -> float:
        return TWO_PI * self.d2_hz

    def validate(self) -> None:
        kind, _, axis = self.polarization.partition("_")
        if kind not in ("circular", "linear") or axis.split("_")[0] not in ("x", "y", "z"):
            raise ConfigurationError(f"unknown polarization `{self.polarization}`", "light_shift.polarization")
        if len(self.quantization_axis) != 3:
            raise ConfigurationError("must have three components", "light_shift.quantization_axis")


@dataclass
class OutputConfig:
    dir: Optional[str] = None


@dataclass
class ExperimentConfig:
    schema_version: int = SCHEMA_VERSION
    simulation: str = Simulations.RABI.value
    seed: int = 0
    label: str = "run"
    spectrum: SpectrumConfig = field(default_factory=SpectrumConfig)
    method: MethodConfig = field(default_factory=MethodConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    sequence: SequenceConfig = field(default_factory=SequenceConfig)
    array: ArrayConfig = field(default_factory=ArrayConfig)
    light_shift: LightShiftConfig = field(default_factory=LightShiftConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigurationError(f"unsupported version {self.schema_version}", "schema_version")
        _check_choice(self.simulation, Simulations, "simulation")
        for section in (self.spectrum, self.method, self.dynamics, self.noise, self.sequence, self.array, self.light_shift):
            section.validate()

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _check_choice(value: str, choices: typing.Type[Enum], path: str) -> None:
    allowed = [x.value for x in choices]
    if value not in allowed:
        raise ConfigurationError(f"`{value}` is not one of {allowed}", path)


def _coerce(value: Any, annotation: Any, path: str) -> Any:
    origin = typing.get_origin(annotation)
    args = typing.get_args(annotation)

    if origin is typing.Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)][0]
        return _coerce(value, inner, path)
    if origin in (list, List):
        if not isinstance(value, list):
            raise ConfigurationError(f"expected a list, got {type(value).__name__}", path)
        return [_coerce(v, args[0], f"{path}[{i}]") for i, v in enumerate(value)]
    if is_dataclass(annotation):
        return _build(annotation, value, path)
    if annotation is bool:
        if not isinstance(value, bool):
            raise ConfigurationError(f"expected a boolean, got {value!r}", path)
        return value
    if annotation is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigurationError(f"expected an integer, got {value!r}", path)
        return value
    if annotation is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigurationError(f"expected a number, got {value!r}", path)
        return float(value)
    if annotation is str:
        if not isinstance(value, str):
            raise ConfigurationError(f"expected a string, got {value!r}", path)
        return value
    raise ConfigurationError(f"unsupported field type {annotation}", path)


def _build(cls: type, data: Any, path: str = "") -> Any:
    if not isinstance(data, Mapping):
        raise ConfigurationError(f"expected an object, got {type(data).__name__}", path or None)

    hints = typing.get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigurationError("unknown key", f"{path}.{key}" if path else key)

    kwargs = {}
    for name in known:
        if name in data:
            kwargs[name] = _coerce(data[name], hints[name], f"{path}.{name}" if path else name)
    return cls(**kwargs)


def config_from_dict(data: Mapping[str, Any]) -> ExperimentConfig:
    config = _build(ExperimentConfig, data)
    config.validate()
    return config


def load_config(path: str) -> ExperimentConfig:
    with open(path) as f:
        text = f.read()
    if text.strip() == "":
        return config_from_dict({})
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"invalid JSON: {e}")
    return config_from_dict(data)


def resolve_out_dir(cli_value: Optional[str], config: Optional[ExperimentConfig] = None) -> str:
    if cli_value is not None:
        return cli_value
    if config is not None and config.output.dir is not None:
        return config.output.dir
    return os.environ.get(OUT_DIR_ENV, DEFAULT_OUT_DIR)


__all__ = [
    "ArrayConfig",
    "DynamicsConfig",
    "ExperimentConfig",
    "LightShiftConfig",
    "MethodConfig",
    "NoiseConfig",
    "OutputConfig",
    "SCHEMA_VERSION",
    "SequenceConfig",
    "Simulations",
    "SpectrumConfig",
    "config_from_dict",
    "load_config",
    "resolve_out_dir",
]
