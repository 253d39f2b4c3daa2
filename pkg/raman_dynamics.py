"""
Driven Λ-system dynamics. The drive Ω(t) = Ω₀ Σₙ aₙ e^{inωt} is periodic with the beat period
2π/ω, so both the three-level and the adiabatically eliminated two-level runs integrate a
single period and reach later times through powers of the one-period propagator.
"""

import logging
import math
from dataclasses import dataclass
from typing import (
    Callable,
    Optional,
    Tuple
)

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray
)
from scipy.integrate import solve_ivp
from scipy.linalg import (
    polar,
    schur
)

from errors import (
    ConfigurationError,
    DomainError,
    IntegrationError,
    SingularityError
)
from export import write_csv
from spectrum import (
    SidebandSpectrum,
    overlap
)

logger = logging.getLogger(__name__)

RTOL = 1e-10
ATOL = 1e-12
SPACING_TOLERANCE = 1e-9
SPAN_TOLERANCE = 1e-12
ADIABATIC_MARGIN = 10
DEFAULT_SAMPLES = 201


@dataclass(frozen=True)
class ThreeLevelParams:
    """
    States |0⟩, |1⟩ split by ω_q and an excited state |2⟩ at detuning Δ, driven by the
    sideband spectrum on both legs. The spectrum spacing must be ω_q / order.
    """

    qubit_frequency: float
    detuning: float
    spectrum: SidebandSpectrum
    linewidth: float = 0.0
    order: int = 1

    def __post_init__(self) -> None:
        if self.qubit_frequency <= 0.0:
            raise ConfigurationError(f"must be positive, got {self.qubit_frequency}", "dynamics.qubit_frequency")
        if self.order < 1:
            raise ConfigurationError(f"must be >= 1, got {self.order}", "dynamics.order")
        if self.linewidth < 0.0:
            raise ConfigurationError(f"must be non-negative, got {self.linewidth}", "dynamics.linewidth")
        expected = self.qubit_frequency / self.order
        if abs(self.spectrum.mod_frequency - expected) > SPACING_TOLERANCE * expected:
            raise ConfigurationError(
                f"sideband spacing {self.spectrum.mod_frequency} does not match ω_q / {self.order} = {expected}",
                "spectrum.mod_frequency",
            )

    @property
    def beat_period(self) -> float:
        return self.spectrum.beat_period


@dataclass(frozen=True)
class StateTrajectory:
    times: NDArray
    populations: NDArray
    coherences: NDArray

    @property
    def p0(self) -> NDArray:
        return self.populations[:, 0]

    @property
    def p1(self) -> NDArray:
        return self.populations[:, 1]

    @property
    def p2(self) -> NDArray:
        return self.populations[:, 2]

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.sum(self.populations, axis=1) - 1.0)))


def spectral_span(spec: SidebandSpectrum, tol: float = SPAN_TOLERANCE) -> int:
    """Largest |n| whose amplitude exceeds `tol`."""
    significant = np.abs(spec.amplitudes) > tol
    return int(np.max(np.abs(spec.indices[significant])))


def _check_detuning(detuning: float) -> None:
    if detuning == 0.0:
        raise SingularityError("zero single-photon detuning")


def raman_rabi_frequency(params: ThreeLevelParams) -> float:
    """|Ω₀|² / (2|Δ|) · |Σ aₙ* aₙ₊ₖ|; the phase is reported by `raman_drive_phase`."""
    _check_detuning(params.detuning)
    spec = params.spectrum
    return spec.carrier_power_scale / (2.0 * abs(params.detuning)) * abs(overlap(spec, params.order))


def raman_drive_phase(params: ThreeLevelParams) -> float:
    return float(np.angle(overlap(params.spectrum, params.order)))


def scattering_figures(params: ThreeLevelParams) -> Tuple[float, float]:
    """
    Scattering rate Γ⟨|Ω|²⟩ / (4Δ²) and the number of π pulses completed per scattering event.
    """
    _check_detuning(params.detuning)
    if params.linewidth <= 0.0:
        raise DomainError(f"excited-state linewidth must be positive, got {params.linewidth}")

    spec = params.spectrum
    mean_intensity = spec.carrier_power_scale * spec.total_power
    gamma_sc = params.linewidth * mean_intensity / (4.0 * params.detuning ** 2)
    pulses = (raman_rabi_frequency(params) / math.pi) / gamma_sc
    return gamma_sc, pulses


class _Drive(object):
    """Ω(t) rebuilt from the significant sideband components."""

    def __init__(self, spec: SidebandSpectrum) -> None:
        span = spectral_span(spec)
        keep = np.abs(spec.indices) <= span
        self._indices = spec.indices[keep]
        self._amplitudes = spec.amplitudes[keep] * math.sqrt(spec.carrier_power_scale)
        self._frequency = spec.mod_frequency

    def field(self, t: float) -> complex:
        return complex(np.dot(self._amplitudes, np.exp(1j * self._frequency * t * self._indices)))


def _check_tls_validity(params: ThreeLevelParams) -> None:
    span = spectral_span(params.spectrum)
    minimum = ADIABATIC_MARGIN * span * params.qubit_frequency
    if abs(params.detuning) < minimum:
        raise DomainError(
            f"|Δ| = {abs(params.detuning)} is too small for adiabatic elimination; need >= {minimum}"
        )


def _tls_hamiltonian(params: ThreeLevelParams) -> Callable[[float], NDArray]:
    drive = _Drive(params.spectrum)
    scale = 1.0 / (2.0 * params.detuning)
    wq = params.qubit_frequency

    def hamiltonian(t: float) -> NDArray:
        coupling = -0.5 * scale * abs(drive.field(t)) ** 2
        return np.array([[0.0, coupling], [coupling, wq]], dtype=complex)

    return hamiltonian


def _three_level_hamiltonian(params: ThreeLevelParams) -> Callable[[float], NDArray]:
    drive = _Drive(params.spectrum)
    base = np.diag([0.0, params.qubit_frequency, params.detuning]).astype(complex)

    def hamiltonian(t: float) -> NDArray:
        h = base.copy()
        half = -0.5 * drive.field(t)
        h[2, 0] = h[2, 1] = half
        h[0, 2] = h[1, 2] = half.conjugate()
        return h

    return hamiltonian


@dataclass(frozen=True)
class PeriodPropagator:
    offsets: NDArray
    partial: NDArray
    eigenvectors: NDArray
    eigenphases: NDArray
    period: float

    def power(self, m: NDArray) -> NDArray:
        phases = np.exp(1j * np.outer(m, self.eigenphases))
        z = self.eigenvectors
        return np.einsum("ij,mj,kj->mik", z, phases, z.conj())


def _propagate_period(hamiltonian: Callable[[float], NDArray], dim: int, period: float, offsets: NDArray) -> PeriodPropagator:
    t_eval = np.unique(np.concatenate([offsets, [period]]))

    def rhs(t: float, y: NDArray) -> NDArray:
        return (-1j * hamiltonian(t) @ y.reshape(dim, dim)).ravel()

    sol = solve_ivp(
        rhs,
        (0.0, period),
        np.eye(dim, dtype=complex).ravel(),
        method="DOP853",
        t_eval=t_eval,
        rtol=RTOL,
        atol=ATOL,
    )
    if not sol.success:
        raise IntegrationError(f"one-period propagation failed: {sol.message}", sol.status, sol.nfev)
    logger.debug(f"one-period propagation: {sol.nfev} evaluations, {t_eval.size} output offsets")

    # project onto the nearest unitaries
    propagators = np.stack([polar(p)[0] for p in sol.y.T.reshape(-1, dim, dim)])
    triangular, vectors = schur(propagators[-1], output="complex")
    diagonal = np.diag(triangular)
    return PeriodPropagator(
        offsets=t_eval,
        partial=propagators,
        eigenvectors=vectors,
        eigenphases=np.angle(diagonal),
        period=period,
    )


def _split_times(times: NDArray, period: float) -> Tuple[NDArray, NDArray]:
    m = np.floor(times / period).astype(np.int64)
    r = times - m * period
    wrap = r >= period * (1.0 - 1e-12)
    m[wrap] += 1
    r[wrap] = 0.0
    return m, r


def _evolve(
    hamiltonian: Callable[[float], NDArray],
    dim: int,
    period: float,
    initial: NDArray,
    times: NDArray,
) -> NDArray:
    m, r = _split_times(times, period)
    offsets, inverse = np.unique(r, return_inverse=True)
    prop = _propagate_period(hamiltonian, dim, period, offsets)

    # U(mT + r) = U(r) U_T^m
    index = np.searchsorted(prop.offsets, offsets)
    partial = prop.partial[index][inverse]
    states = np.einsum("mij,mjk,k->mi", partial, prop.power(m), initial)
    return states


def _sample_times(duration: float, times: Optional[ArrayLike]) -> NDArray:
    if times is None:
        if duration <= 0.0:
            raise ValueError(f"duration must be positive, got {duration}")
        return np.linspace(0.0, duration, DEFAULT_SAMPLES)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(times < 0.0):
        raise ValueError("sample times must be a non-empty 1-D array of non-negative values")
    return times


def _initial_state(initial: Optional[ArrayLike], dim: int) -> NDArray:
    if initial is None:
        state = np.zeros(dim, dtype=complex)
        state[0] = 1.0
        return state
    state = np.asarray(initial, dtype=complex)
    if state.shape != (dim,):
        raise ValueError(f"initial state must have {dim} components, got shape {state.shape}")
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"initial state must be normalized, got norm {norm}")
    return state


def _trajectory(times: NDArray, states: NDArray) -> StateTrajectory:
    populations = np.abs(states) ** 2
    if populations.shape[1] == 2:
        populations = np.concatenate([populations, np.zeros((populations.shape[0], 1))], axis=1)
    return StateTrajectory(
        times=times,
        populations=populations,
        coherences=states[:, 0] * states[:, 1].conj(),
    )


def evolve_tls(
    params: ThreeLevelParams,
    duration: float,
    initial: Optional[ArrayLike] = None,
    times: Optional[ArrayLike] = None,
) -> StateTrajectory:
    """
    Two-level dynamics after adiabatic elimination of |2⟩, with coupling Ω_TLS(t) = |Ω(t)|²/(2Δ).
    The light shift common to both ground states is dropped.
    """
    _check_detuning(params.detuning)
    _check_tls_validity(params)
    times = _sample_times(duration, times)
    states = _evolve(_tls_hamiltonian(params), 2, params.beat_period, _initial_state(initial, 2), times)
    return _trajectory(times, states)


def evolve_three_level(
    params: ThreeLevelParams,
    duration: float,
    initial: Optional[ArrayLike] = None,
    times: Optional[ArrayLike] = None,
) -> StateTrajectory:
    times = _sample_times(duration, times)
    states = _evolve(_three_level_hamiltonian(params), 3, params.beat_period, _initial_state(initial, 3), times)
    return _trajectory(times, states)


def floquet_rabi_frequency(params: ThreeLevelParams) -> float:
    """Rabi frequency from the quasienergy splitting of the one-period two-level propagator."""
    _check_detuning(params.detuning)
    prop = _propagate_period(_tls_hamiltonian(params), 2, params.beat_period, np.array([0.0]))
    splitting = abs(prop.eigenphases[0] - prop.eigenphases[1]) % (2.0 * math.pi)
    splitting = min(splitting, 2.0 * math.pi - splitting)
    return splitting / prop.period


def trajectory_to_csv(trajectory: StateTrajectory, path: str) -> None:
    write_csv(
        path,
        ["t", "p0", "p1", "p2", "re_coh", "im_coh"],
        (
            [t, p[0], p[1], p[2], c.real, c.imag]
            for t, p, c in zip(trajectory.times, trajectory.populations, trajectory.coherences)
        ),
    )


__all__ = [
    "StateTrajectory",
    "ThreeLevelParams",
    "evolve_three_level",
    "evolve_tls",
    "floquet_rabi_frequency",
    "raman_drive_phase",
    "raman_rabi_frequency",
    "scattering_figures",
    "spectral_span",
    "trajectory_to_csv",
]
