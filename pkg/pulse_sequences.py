"""
Qubit pulse sequences as instantaneous rotations separated by free evolution, simulated
over shots that each carry a frozen detuning and a scattering/idle-decay hazard.

A shot whose accumulated hazard exceeds its exponential threshold is depolarized and reads
out |0⟩ with probability ½. Every other shot contributes its exact |0⟩ population.
"""

import logging
import math
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import (
    dataclass,
    field
)
from enum import Enum
from typing import (
    Any,
    Dict,
    List,
    Optional,
    Sequence,
    Tuple,
    Union
)

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray
)
from scipy.stats import norm

from errors import ConfigurationError
from export import (
    write_csv,
    write_json
)
from fitting import (
    FitModels,
    FitResult,
    fit_decay
)

logger = logging.getLogger(__name__)

XY4_PHASES = (0.0, math.pi / 2.0, 0.0, math.pi / 2.0)
XY8_PHASES = XY4_PHASES + XY4_PHASES[::-1]
XY16_PHASES = XY8_PHASES + tuple(phase + math.pi for phase in XY8_PHASES)

ShotSummary = namedtuple("ShotSummary", ["signal", "stderr"])


class SequenceKinds(Enum):
    RABI = "rabi"
    RAMSEY = "ramsey"
    CPMG = "cpmg"
    XY8 = "xy8"
    XY16 = "xy16"
    PI_TRAIN = "pi_train"


class Closers(Enum):
    RETURN = "return"
    FLIP = "flip"

    @property
    def axis_phase(self) -> float:
        return math.pi if self is Closers.RETURN else 0.0


class DetuningDistributions(Enum):
    DELTA = "delta"
    GAUSSIAN = "gaussian"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class Pulse:
    axis_phase: float
    angle: float
    duration: float

    def __post_init__(self) -> None:
        if not 0.0 < self.angle <= 2.0 * math.pi:
            raise ValueError(f"rotation angle must lie in (0, 2π], got {self.angle}")
        if self.duration <= 0.0:
            raise ValueError(f"pulse duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class FreeEvolution:
    duration: float

    def __post_init__(self) -> None:
        if self.duration < 0.0:
            raise ValueError(f"free evolution duration must be non-negative, got {self.duration}")


Element = Union[Pulse, FreeEvolution]


@dataclass(frozen=True)
class Segment:
    elements: Tuple[Element, ...]
    repeats: int = 1

    def __post_init__(self) -> None:
        if len(self.elements) == 0:
            raise ValueError("segment must contain at least one element")
        if self.repeats < 1:
            raise ValueError(f"segment repeats must be >= 1, got {self.repeats}")


@dataclass(frozen=True)
class PulseSequence:
    segments: Tuple[Segment, ...]
    label: str
    pi_time: float

    def __post_init__(self) -> None:
        if len(self.segments) == 0:
            raise ValueError("pulse sequence must not be empty")
        if not math.isfinite(self.duration):
            raise ValueError("pulse sequence duration must be finite")

    @property
    def elements(self) -> List[Element]:
        return [e for s in self.segments for _ in range(s.repeats) for e in s.elements]

    def _total(self, kind: type, attribute: str) -> float:
        return sum(
            s.repeats * sum(getattr(e, attribute) for e in s.elements if isinstance(e, kind))
            for s in self.segments
        )

    @property
    def n_pi_pulses(self) -> int:
        return sum(
            s.repeats * sum(1 for e in s.elements if isinstance(e, Pulse) and math.isclose(e.angle, math.pi))
            for s in self.segments
        )

    @property
    def pulse_area(self) -> float:
        """Total drive time in units of the π time."""
        return self._total(Pulse, "duration") / self.pi_time

    @property
    def idle_time(self) -> float:
        return self._total(FreeEvolution, "duration")

    @property
    def duration(self) -> float:
        return self._total(Pulse, "duration") + self.idle_time


def _rotation(pi_time: float, angle: float, axis_phase: float) -> Pulse:
    return Pulse(axis_phase=axis_phase, angle=angle, duration=pi_time * angle / math.pi)


def _echo_block(pi_time: float, gap: float, phases: Sequence[float]) -> Tuple[Element, ...]:
    block = []
    for phase in phases:
        if gap > 0.0:
            block.append(FreeEvolution(gap / 2.0))
        block.append(_rotation(pi_time, math.pi, phase))
        if gap > 0.0:
            block.append(FreeEvolution(gap / 2.0))
    return tuple(block)


def build_sequence(
    kind: SequenceKinds,
    pi_time: float,
    n: int = 1,
    gap: float = 0.0,
    final_phase: float = 0.0,
    duration: Optional[float] = None,
    closer: Closers = Closers.RETURN,
    axis_phase: float = 0.0,
) -> PulseSequence:
    """
    rabi: one x pulse of length `duration`.
    ramsey: (π/2)ₓ, free evolution `gap`, π/2 about phase π + `final_phase`.
    cpmg: (π/2)ₓ [gap/2 π_y gap/2]ⁿ (π/2) closer.
    xy8 / xy16: (π/2)ₓ, n repeats of the XY8 / XY16 phase pattern, (π/2) closer.
    pi_train: (π/2)ₓ, n π pulses about `axis_phase`, (π/2) closer.
    """
    if pi_time <= 0.0:
        raise ConfigurationError(f"must be positive, got {pi_time}", "sequence.pi_time_s")
    if n < 1:
        raise ConfigurationError(f"must be >= 1, got {n}", "sequence.n")
    if gap < 0.0:
        raise ConfigurationError(f"must be non-negative, got {gap}", "sequence.gap_s")

    opener = Segment((_rotation(pi_time, math.pi / 2.0, 0.0),))
    closing = Segment((_rotation(pi_time, math.pi / 2.0, closer.axis_phase),))

    if kind is SequenceKinds.RABI:
        if duration is None or duration <= 0.0:
            raise ConfigurationError(f"must be positive, got {duration}", "sequence.duration_s")
        angle = (math.pi * duration / pi_time) % (2.0 * math.pi) or 2.0 * math.pi
        pulse = Pulse(axis_phase=0.0, angle=angle, duration=duration)
        return PulseSequence((Segment((pulse,)),), f"rabi({duration:.6g})", pi_time)
    elif kind is SequenceKinds.RAMSEY:
        closing = Segment((_rotation(pi_time, math.pi / 2.0, math.pi + final_phase),))
        segments = [opener]
        if gap > 0.0:
            segments.append(Segment((FreeEvolution(gap),)))
        segments.append(closing)
        return PulseSequence(tuple(segments), f"ramsey({gap:.6g},{final_phase:.6g})", pi_time)
    elif kind is SequenceKinds.CPMG:
        block = Segment(_echo_block(pi_time, gap, (math.pi / 2.0,)), n)
        return PulseSequence((opener, block, closing), f"cpmg({n})", pi_time)
    elif kind is SequenceKinds.XY8:
        block = Segment(_echo_block(pi_time, gap, XY8_PHASES), n)
        return PulseSequence((opener, block, closing), f"xy8-{n}", pi_time)
    elif kind is SequenceKinds.XY16:
        block = Segment(_echo_block(pi_time, gap, XY16_PHASES), n)
        return PulseSequence((opener, block, closing), f"xy16-{n}", pi_time)
    elif kind is SequenceKinds.PI_TRAIN:
        block = Segment(_echo_block(pi_time, gap, (axis_phase,)), n)
        return PulseSequence((opener, block, closing), f"pi_train({n})", pi_time)
    else:
        raise ValueError(f"Cannot build sequence of type `{kind}`")


@dataclass(frozen=True)
class DetuningDistribution:
    kind: DetuningDistributions = DetuningDistributions.DELTA
    mean: float = 0.0
    sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.kind is DetuningDistributions.EXPONENTIAL and self.mean <= 0.0:
            raise ConfigurationError(f"must be positive, got {self.mean}", "noise.detuning_mean_hz")
        if self.sigma < 0.0:
            raise ConfigurationError(f"must be non-negative, got {self.sigma}", "noise.detuning_sigma_hz")

    def sample(self, u: NDArray) -> NDArray:
        """Inverse-CDF transform of uniform variates in (0, 1)."""
        if self.kind is DetuningDistributions.DELTA:
            return np.full_like(u, self.mean)
        elif self.kind is DetuningDistributions.GAUSSIAN:
            return self.mean + self.sigma * norm.ppf(u)
        elif self.kind is DetuningDistributions.EXPONENTIAL:
            return -self.mean * np.log1p(-u)
        else:
            raise ValueError(f"Cannot sample {self.__class__.__name__} of type `{self.kind}`")


@dataclass(frozen=True)
class NoiseModel:
    scatter_prob: float = 0.0
    detuning: DetuningDistribution = field(default_factory=DetuningDistribution)
    amplitude_error: float = 0.0
    idle_t1: float = math.inf
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.scatter_prob < 1.0:
            raise ConfigurationError(f"must lie in [0, 1), got {self.scatter_prob}", "noise.scatter_prob")
        if self.idle_t1 <= 0.0:
            raise ConfigurationError(f"must be positive, got {self.idle_t1}", "noise.idle_t1_s")

    @property
    def is_deterministic(self) -> bool:
        return (
            self.scatter_prob == 0.0
            and math.isinf(self.idle_t1)
            and self.detuning.kind is DetuningDistributions.DELTA
        )

    @property
    def hazard_per_pi_pulse(self) -> float:
        return -math.log1p(-self.scatter_prob)


@dataclass(frozen=True)
class ShotDraws:
    """Per-shot exponential hazard thresholds and frozen detunings, shared across a scan."""

    thresholds: NDArray
    detunings: NDArray

    @property
    def shots(self) -> int:
        return self.thresholds.size

    @classmethod
    def generate(cls, noise: NoiseModel, shots: int) -> "ShotDraws":
        if shots < 1:
            raise ConfigurationError(f"must be >= 1, got {shots}", "shots")

        children = np.random.SeedSequence(noise.seed).spawn(shots + 1)
        jitter = np.array([np.random.default_rng(child).random(2) for child in children[:shots]])
        permutation = np.random.default_rng(children[shots]).permutation(shots)

        # shot i owns hazard stratum i and detuning stratum permutation[i]
        strata = np.arange(shots)
        u_hazard = (strata + jitter[:, 0]) / shots
        u_detuning = (permutation + jitter[:, 1]) / shots
        return cls(thresholds=-np.log1p(-u_hazard), detunings=noise.detuning.sample(u_detuning))


def _rotation_matrices(angle: float, axis_phase: float) -> NDArray:
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    return np.array(
        [[c, -1j * s * np.exp(-1j * axis_phase)], [-1j * s * np.exp(1j * axis_phase), c]],
        dtype=complex,
    )


def _element_matrices(element: Element, detunings: NDArray, amplitude_error: float) -> NDArray:
    if isinstance(element, Pulse):
        matrix = _rotation_matrices(element.angle * (1.0 + amplitude_error), element.axis_phase)
        return np.broadcast_to(matrix, (detunings.size, 2, 2))

    # H = −δσz/2
    phase = 0.5 * detunings * element.duration
    matrices = np.zeros((detunings.size, 2, 2), dtype=complex)
    matrices[:, 0, 0] = np.exp(1j * phase)
    matrices[:, 1, 1] = np.exp(-1j * phase)
    return matrices


def _compose(seq: PulseSequence, detunings: NDArray, amplitude_error: float) -> NDArray:
    total = np.broadcast_to(np.eye(2, dtype=complex), (detunings.size, 2, 2))
    for segment in seq.segments:
        block = np.broadcast_to(np.eye(2, dtype=complex), (detunings.size, 2, 2))
        for element in segment.elements:
            block = _element_matrices(element, detunings, amplitude_error) @ block
        if segment.repeats > 1:
            block = np.linalg.matrix_power(block, segment.repeats)
        total = block @ total
    return total


def sequence_unitary(seq: PulseSequence, detuning: float = 0.0, amplitude_error: float = 0.0) -> NDArray:
    return _compose(seq, np.array([detuning]), amplitude_error)[0]


def _shot_signals(seq: PulseSequence, noise: NoiseModel, draws: ShotDraws) -> NDArray:
    if noise.detuning.kind is DetuningDistributions.DELTA:
        unitary = _compose(seq, draws.detunings[:1], noise.amplitude_error)
        p0 = np.full(draws.shots, abs(unitary[0, 0, 0]) ** 2)
    else:
        unitaries = _compose(seq, draws.detunings, noise.amplitude_error)
        p0 = np.abs(unitaries[:, 0, 0]) ** 2

    hazard = noise.hazard_per_pi_pulse * seq.pulse_area + seq.idle_time / noise.idle_t1
    return np.where(hazard < draws.thresholds, p0, 0.5)


def process(
    sequences: Sequence[PulseSequence],
    noise: NoiseModel,
    draws: ShotDraws,
) -> List[ShotSummary]:
    summaries = []
    for seq in sequences:
        signals = _shot_signals(seq, noise, draws)
        stderr = float(np.std(signals, ddof=1) / math.sqrt(signals.size)) if signals.size > 1 else 0.0
        summaries.append(ShotSummary(signal=float(np.clip(np.mean(signals), 0.0, 1.0)), stderr=stderr))
    return summaries


@dataclass(frozen=True)
class SequenceResult:
    label: str
    scan_values: NDArray
    signal: NDArray
    stderr: NDArray
    shots: int
    seed: int
    fit_model: Optional[FitModels] = None
    fitted: Optional[FitResult] = None

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise ValueError(f"shots must be positive, got {self.shots}")
        if np.any(self.signal < 0.0) or np.any(self.signal > 1.0):
            raise ValueError("signal must lie in [0, 1]")

    def summary(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "fit_model": None if self.fit_model is None else self.fit_model.value,
            "params": {} if self.fitted is None else self.fitted.params,
            "uncertainties": {} if self.fitted is None else self.fitted.uncertainties,
            "one_over_e": None if self.fitted is None else self.fitted.one_over_e_time,
            "shots": self.shots,
            "seed": self.seed,
        }

    def write_csv(self, path: str) -> None:
        write_csv(path, ["scan_value", "signal", "stderr"], zip(self.scan_values, self.signal, self.stderr))

    def write_summary(self, path: str) -> None:
        write_json(path, self.summary())


def _fan_out(
    sequences: Sequence[PulseSequence],
    noise: NoiseModel,
    draws: ShotDraws,
    num_workers: int,
) -> List[ShotSummary]:
    if num_workers <= 1 or len(sequences) <= 1:
        return process(sequences, noise, draws)

    chunk = math.ceil(len(sequences) / num_workers)
    futures = []
    with ProcessPoolExecutor(num_workers) as executor:
        for i in range(num_workers):
            future = executor.submit(
                process,
                sequences=sequences[i * chunk : (i + 1) * chunk],
                noise=noise,
                draws=draws,
            )
            futures.append(future)

    results = []
    for future in futures:
        results.extend(future.result())
    return results


def _fit(scan_values: NDArray, signal: NDArray, fit_model: Optional[FitModels], **kwargs) -> Optional[FitResult]:
    if fit_model is None:
        return None
    result = fit_decay(scan_values, signal, fit_model, **kwargs)
    logger.info(f"{fit_model.value} fit: 1/e = {result.one_over_e_time:.6g}")
    return result


def simulate_scan(
    sequences: Sequence[PulseSequence],
    scan_values: ArrayLike,
    noise: NoiseModel,
    shots: int,
    fit_model: Optional[FitModels] = None,
    num_workers: int = 1,
    label: str = "scan",
) -> SequenceResult:
    """Runs a family of sequences over the same per-shot draws and optionally fits the decay."""
    scan_values = np.asarray(scan_values, dtype=float)
    if scan_values.shape != (len(sequences),):
        raise ValueError("need exactly one scan value per sequence")

    if noise.is_deterministic:
        shots = 1
    draws = ShotDraws.generate(noise, shots)
    logger.info(f"simulating {len(sequences)} sequences over {shots} shots")
    summaries = _fan_out(list(sequences), noise, draws, num_workers)

    signal = np.array([s.signal for s in summaries])
    stderr = np.array([s.stderr for s in summaries])
    return SequenceResult(
        label=label,
        scan_values=scan_values,
        signal=signal,
        stderr=stderr,
        shots=shots,
        seed=noise.seed,
        fit_model=fit_model,
        fitted=_fit(scan_values, signal, fit_model),
    )


def simulate_sequence(seq: PulseSequence, noise: NoiseModel, shots: int = 1, scan_value: float = 0.0) -> SequenceResult:
    return simulate_scan([seq], [scan_value], noise, shots, label=seq.label)


def ramsey_contrast(
    noise: NoiseModel,
    gaps: ArrayLike,
    shots: int,
    pi_time: float = 1e-9,
    num_workers: int = 1,
    label: str = "ramsey",
) -> SequenceResult:
    """
    Fringe contrast √(X² + Y²) from closing phases 0 and π/2 at each gap. Exponential detuning
    statistics are fitted with the thermal dephasing envelope, gaussian ones with a gaussian.
    """
    gaps = np.asarray(gaps, dtype=float)
    if noise.detuning.kind is DetuningDistributions.EXPONENTIAL:
        fit_model = FitModels.THERMAL_DEPHASING
    elif noise.detuning.kind is DetuningDistributions.GAUSSIAN:
        fit_model = FitModels.GAUSSIAN
    else:
        fit_model = None

    sequences = [
        build_sequence(SequenceKinds.RAMSEY, pi_time, gap=float(gap), final_phase=phase)
        for gap in gaps
        for phase in (0.0, math.pi / 2.0)
    ]
    if noise.is_deterministic:
        shots = 1
    draws = ShotDraws.generate(noise, shots)
    summaries = _fan_out(sequences, noise, draws, num_workers)

    p_x = np.array([s.signal for s in summaries[0::2]])
    p_y = np.array([s.signal for s in summaries[1::2]])
    x = 2.0 * p_x - 1.0
    y = 2.0 * p_y - 1.0
    contrast = np.clip(np.hypot(x, y), 0.0, 1.0)

    sx = 2.0 * np.array([s.stderr for s in summaries[0::2]])
    sy = 2.0 * np.array([s.stderr for s in summaries[1::2]])
    with np.errstate(invalid="ignore", divide="ignore"):
        stderr = np.where(contrast > 0.0, np.sqrt((x * sx) ** 2 + (y * sy) ** 2) / contrast, np.hypot(sx, sy))

    fitted = None
    if fit_model is not None and gaps.size >= 5:
        fitted = _fit(gaps, contrast, fit_model, fixed={"c": 0.0})
    return SequenceResult(
        label=label,
        scan_values=gaps,
        signal=contrast,
        stderr=stderr,
        shots=shots,
        seed=noise.seed,
        fit_model=fit_model if fitted is not None else None,
        fitted=fitted,
    )


def fidelity_from_decay(tau_pulses: float) -> float:
    """Per-π-pulse fidelity e^{−1/τ} of a decay with 1/e constant τ pulses."""
    if tau_pulses <= 0.0:
        raise ValueError(f"decay constant must be positive, got {tau_pulses}")
    return math.exp(-1.0 / tau_pulses)


__all__ = [
    "Closers",
    "DetuningDistribution",
    "DetuningDistributions",
    "FreeEvolution",
    "NoiseModel",
    "Pulse",
    "PulseSequence",
    "Segment",
    "SequenceKinds",
    "SequenceResult",
    "ShotDraws",
    "build_sequence",
    "fidelity_from_decay",
    "process",
    "ramsey_contrast",
    "sequence_unitary",
    "simulate_scan",
    "simulate_sequence",
]
