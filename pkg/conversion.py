"""
Phase-to-amplitude modulation converters. Each method exposes the closed-form
transmission T(β) and amplitude-modulation efficiency η(β), and a numeric path that builds
the actual sideband spectrum and measures both. The coherence metric C = T·η² ranks the
methods at equal Raman Rabi frequency.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import (
    Callable,
    List,
    Optional,
    Sequence,
    Tuple
)

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray
)
from scipy.optimize import minimize

from errors import (
    DegenerateSpectrumError,
    DomainError,
    SingularityError
)
from export import write_csv
from special_functions import (
    bessel_j,
    bessel_j_array,
    default_truncation
)
from spectrum import (
    FilterKind,
    SidebandSpectrum,
    am_efficiency,
    apply_filter,
    apply_quadratic_phase,
    beat_time_grid,
    harmonic_coefficient,
    intensity_waveform,
    mach_zehnder_output,
    phase_modulate
)

logger = logging.getLogger(__name__)

SCAN_STEP = 1e-3
REFINE_TOLERANCE = 1e-7
DEFAULT_ALPHA = 0.76
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class ConversionMethods(Enum):
    FILTER_CARRIER = "filter_carrier"
    FILTER_MZ_INTERFEROMETER = "filter_mz_interferometer"
    MZ_MODULATOR_HALF_TRANSMISSION = "mz_modulator_half"
    MZ_MODULATOR_MIN_TRANSMISSION = "mz_modulator_min"
    DISPERSIVE = "dispersive"


class SidebandBounds(Enum):
    UNIFORM = "uniform"
    OPTIMAL = "optimal"


@dataclass(frozen=True)
class MethodReport:
    transmission: float
    am_efficiency: float
    coherence: float
    beta: float
    alpha: Optional[float] = None
    method: str = ""

    def __post_init__(self) -> None:
        if self.coherence != self.transmission * self.am_efficiency * self.am_efficiency:
            raise ValueError("coherence metric must equal T·η²")

    @classmethod
    def build(
        cls,
        transmission: float,
        am_efficiency: float,
        beta: float,
        alpha: Optional[float] = None,
        method: str = "",
    ) -> "MethodReport":
        return cls(
            transmission=float(transmission),
            am_efficiency=float(am_efficiency),
            coherence=float(transmission) * float(am_efficiency) * float(am_efficiency),
            beta=float(beta),
            alpha=alpha,
            method=method,
        )


def _check_beta(beta: float) -> None:
    if not 0.0 <= beta <= 2.0 * math.pi:
        raise DomainError(f"modulation depth must lie in [0, 2π], got {beta}")


class ConversionMethod(object):
    # modulation frequency is ω_q / ORDER; the Raman drive is the ORDER-th intensity harmonic
    ORDER: int = 1

    def closed_form(self, betas: NDArray) -> Tuple[NDArray, NDArray]:
        raise NotImplementedError()

    def measure(self, beta: float, qubit_frequency: float = 1.0) -> Tuple[float, float]:
        spec = self.spectrum(beta, qubit_frequency)
        return spec.total_power, am_efficiency(spec, self.order)

    def spectrum(self, beta: float, qubit_frequency: float = 1.0) -> SidebandSpectrum:
        raise NotImplementedError()

    @property
    def order(self) -> int:
        return self.ORDER

    @property
    def alpha(self) -> Optional[float]:
        return None

    def coherence(self, betas: ArrayLike) -> NDArray:
        transmission, efficiency = self.closed_form(np.atleast_1d(np.asarray(betas, dtype=float)))
        return transmission * efficiency * efficiency

    def _modulated(self, beta: float, qubit_frequency: float) -> SidebandSpectrum:
        return phase_modulate(beta, qubit_frequency / self.order, default_truncation(beta))

    def __str__(self) -> str:
        raise NotImplementedError()

    @classmethod
    def create(cls, x: ConversionMethods, alpha: Optional[float] = None, order: int = 1):
        if x is ConversionMethods.FILTER_CARRIER:
            return FilterCarrier()
        elif x is ConversionMethods.FILTER_MZ_INTERFEROMETER:
            return FilterMachZehnderInterferometer()
        elif x is ConversionMethods.MZ_MODULATOR_HALF_TRANSMISSION:
            return MZModulatorHalfTransmission()
        elif x is ConversionMethods.MZ_MODULATOR_MIN_TRANSMISSION:
            return MZModulatorMinTransmission()
        elif x is ConversionMethods.DISPERSIVE:
            return Dispersive(alpha=DEFAULT_ALPHA if alpha is None else alpha, order=order)
        else:
            raise ValueError(f"Cannot create {cls.__name__} of type `{x}`")


class FilterCarrier(ConversionMethod):
    """Cavity removes the n = 0 component of a field modulated at ω_q/2."""

    ORDER = 2

    def closed_form(self, betas: NDArray) -> Tuple[NDArray, NDArray]:
        j0 = bessel_j_array(0, betas)
        j2 = bessel_j_array(2, betas)
        transmission = 1.0 - j0 * j0
        if np.any(transmission <= 0.0):
            raise DegenerateSpectrumError("carrier filter transmits nothing at β = 0")
        return transmission, np.abs(2.0 * j0 * j2) / transmission

    def spectrum(self, beta: float, qubit_frequency: float = 1.0) -> SidebandSpectrum:
        return apply_filter(self._modulated(beta, qubit_frequency), FilterKind.remove_carrier())

    def __str__(self) -> str:
        return ConversionMethods.FILTER_CARRIER.value


class FilterMachZehnderInterferometer(ConversionMethod):
    """Unbalanced interferometer keeps the even sidebands of a field modulated at ω_q/2."""

    ORDER = 2

    def closed_form(self, betas: NDArray) -> Tuple[NDArray, NDArray]:
        j0 = bessel_j_array(0, 2.0 * betas)
        j2 = bessel_j_array(2, 2.0 * betas)
        return 0.5 * (1.0 + j0), np.abs(j2) / (1.0 + j0)

    def spectrum(self, beta: float, qubit_frequency: float = 1.0) -> SidebandSpectrum:
        return apply_filter(self._modulated(beta, qubit_frequency), FilterKind.remove_odd_sidebands())

    def __str__(self) -> str:
        return ConversionMethods.FILTER_MZ_INTERFEROMETER.value


class _MZModulator(ConversionMethod):
    BIAS: float = 0.0

    def spectrum(self, beta: float, qubit_frequency: float = 1.0) -> SidebandSpectrum:
        return mach_zehnder_output(self._modulated(beta, qubit_frequency), self.BIAS)

    def measure(self, beta: float, qubit_frequency: float = 1.0) -> Tuple[float, float]:
        # read T and η off the intensity waveform, as a photodetector would
        spec = self.spectrum(beta, qubit_frequency)
        waveform = intensity_waveform(spec, beat_time_grid(spec))
        transmission = harmonic_coefficient(waveform, 0).real
        return transmission, abs(harmonic_coefficient(waveform, self.order)) / transmission


class MZModulatorHalfTransmission(_MZModulator):
    """φ(t) = π/2 + β sin(ω_q t): intensity ½(1 + sin(β sin ω_q t))."""

    ORDER = 1
    BIAS = math.pi / 2.0

    def closed_form(self, betas: NDArray) -> Tuple[NDArray, NDArray]:
        return np.full_like(betas, 0.5), np.abs(bessel_j_array(1, betas))

    def __str__(self) -> str:
        return ConversionMethods.MZ_MODULATOR_HALF_TRANSMISSION.value


class MZModulatorMinTransmission(_MZModulator):
    """φ(t) = β sin(ω_q t / 2): intensity ½(1 − cos(β sin(ω_q t / 2)))."""

    ORDER = 2
    BIAS = 0.0

    def closed_form(self, betas: NDArray) -> Tuple[NDArray, NDArray]:
        j0 = bessel_j_array(0, betas)
        j2 = bessel_j_array(2, betas)
        if np.any(1.0 - j0 <= 0.0):
            raise DegenerateSpectrumError("minimum-transmission modulator is dark at β = 0")
        return 0.5 * (1.0 - j0), np.abs(j2) / (1.0 - j0)

    def __str__(self) -> str:
        return ConversionMethods.MZ_MODULATOR_MIN_TRANSMISSION.value


class Dispersive(ConversionMethod):
    """
    Uniform-GDD reflector imprinting e^{iαn²}. Modulating at ω_q/k gives
    η_k = |J_k(2β sin(αk))| with no power loss.
    """

    def __init__(self, alpha: float, order: int = 1) -> None:
        if not 0.0 < alpha < math.pi:
            raise DomainError(f"dispersive curvature must lie in (0, π), got {alpha}")
        if order < 1:
            raise DomainError(f"subharmonic order must be >= 1, got {order}")
        self._alpha = alpha
        self._order = order

    @property
    def order(self) -> int:
        return self._order

    @property
    def alpha(self) -> Optional[float]:
        return self._alpha

    def closed_form(self, betas: NDArray) -> Tuple[NDArray, NDArray]:
        argument = 2.0 * betas * math.sin(self._alpha * self._order)
        return np.ones_like(betas), np.abs(bessel_j_array(self._order, argument))

    def spectrum(self, beta: float, qubit_frequency: float = 1.0) -> SidebandSpectrum:
        return apply_quadratic_phase(self._modulated(beta, qubit_frequency), self._alpha)

    def __str__(self) -> str:
        return ConversionMethods.DISPERSIVE.value


def method_metrics(method: ConversionMethod, beta: float) -> MethodReport:
    _check_beta(beta)
    transmission, efficiency = method.closed_form(np.array([beta]))
    return MethodReport.build(transmission[0], efficiency[0], beta, method.alpha, str(method))


def method_metrics_numeric(method: ConversionMethod, beta: float) -> MethodReport:
    _check_beta(beta)
    transmission, efficiency = method.measure(beta)
    return MethodReport.build(transmission, efficiency, beta, method.alpha, str(method))


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = REFINE_TOLERANCE) -> float:
    """Golden-section search for the maximum of a unimodal f on [a, b]."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@lru_cache(maxsize=None)
def first_j1_maximum() -> float:
    """Location of the first maximum of J₁ (≈ 1.8412), found numerically."""
    return golden_section_max(lambda x: bessel_j(1, x), 1.0, 3.0, tol=1e-11)


def optimize_beta(method: ConversionMethod, beta_max: float = math.pi) -> Tuple[float, MethodReport]:
    """
    Maximizes C(β) on (0, beta_max] by a dense scan followed by golden-section refinement
    of the best bracket. C(β) has several local maxima, so no derivative information is used.
    """
    if not 0.0 < beta_max <= 2.0 * math.pi:
        raise DomainError(f"beta_max must lie in (0, 2π], got {beta_max}")

    grid = np.arange(1, int(math.floor(beta_max / SCAN_STEP)) + 1) * SCAN_STEP
    if grid.size == 0 or grid[-1] < beta_max:
        grid = np.append(grid, beta_max)
    values = method.coherence(grid)
    best = int(np.argmax(values))

    lo = grid[best - 1] if best > 0 else 0.5 * grid[0]
    hi = grid[min(best + 1, grid.size - 1)]
    beta_star = golden_section_max(lambda b: float(method.coherence([b])[0]), lo, hi)
    if method.coherence([beta_star])[0] < values[best]:
        beta_star = float(grid[best])

    report = method_metrics(method, beta_star)
    logger.debug(f"{method}: β* = {beta_star:.6f}, C = {report.coherence:.6f}")
    return beta_star, report


def optimize_joint(beta_max: float = math.pi, order: int = 1) -> Tuple[float, float, MethodReport]:
    """
    Joint (β, α) maximization of the dispersive coherence metric with α in (0, π/2].
    The optimum is a ridge 2β sin α = const; a grid scan picks the starting point and a
    bounded quasi-Newton step settles onto the ridge.
    """
    betas = np.linspace(0.01, beta_max, 200)
    alphas = np.linspace(0.01, math.pi / 2.0, 200)
    bb, aa = np.meshgrid(betas, alphas, indexing="ij")
    values = bessel_j_array(order, (2.0 * bb * np.sin(aa * order)).ravel()) ** 2
    i, j = np.unravel_index(int(np.argmax(values)), bb.shape)

    def objective(x: NDArray) -> float:
        return -bessel_j(order, 2.0 * x[0] * math.sin(x[1] * order)) ** 2

    result = minimize(
        objective,
        x0=np.array([betas[i], alphas[j]]),
        method="L-BFGS-B",
        bounds=[(1e-3, beta_max), (1e-3, math.pi / 2.0)],
        options={"ftol": 1e-15, "gtol": 1e-12},
    )
    beta, alpha = float(result.x[0]), float(result.x[1])
    report = method_metrics(Dispersive(alpha, order), beta)
    logger.debug(f"joint optimum: β = {beta:.6f}, α = {alpha:.6f}, C = {report.coherence:.6f}")
    return beta, alpha, report


def required_beta_for_optimum(alpha: float) -> float:
    s = math.sin(alpha)
    if alpha == 0.0 or abs(s) < 1e-15:
        raise SingularityError(f"no modulation depth reaches the J₁ maximum for α = {alpha}")
    if not 0.0 < alpha < math.pi:
        raise DomainError(f"dispersive curvature must lie in (0, π), got {alpha}")
    return first_j1_maximum() / (2.0 * s)


def n_sideband_bound(n: int, kind: SidebandBounds) -> float:
    if n < 2:
        raise ValueError(f"need at least two sidebands, got {n}")
    if kind is SidebandBounds.UNIFORM:
        return (n - 1) / n
    elif kind is SidebandBounds.OPTIMAL:
        return math.cos(math.pi / (n + 1))
    else:
        raise ValueError(f"Unknown sideband bound `{kind}`")


def table_s1(beta_max: float = 2.0 * math.pi, alpha: float = DEFAULT_ALPHA) -> List[MethodReport]:
    reports = []
    for x in ConversionMethods:
        method = ConversionMethod.create(x, alpha=alpha)
        _, report = optimize_beta(method, beta_max)
        reports.append(report)

    _, _, joint = optimize_joint(min(beta_max, math.pi))
    reports.append(
        MethodReport.build(joint.transmission, joint.am_efficiency, joint.beta, joint.alpha, "dispersive_joint")
    )
    return reports


def fig2b_curve(betas: Sequence[float], alpha: float) -> List[Tuple[float, float]]:
    method = Dispersive(alpha)
    rows = []
    for beta in betas:
        if not 0.0 < beta <= math.pi:
            raise DomainError(f"efficiency curve grid must lie in (0, π], got {beta}")
        rows.append((float(beta), method_metrics(method, beta).am_efficiency))
    return rows


def refine_curve_peak(rows: Sequence[Tuple[float, float]], alpha: float) -> Tuple[float, float]:
    """Golden-section refinement of the grid maximum of `fig2b_curve` between its neighbours."""
    if len(rows) == 0:
        raise ValueError("need at least one grid point")
    method = Dispersive(alpha)
    i = max(range(len(rows)), key=lambda j: rows[j][1])
    lo = rows[max(i - 1, 0)][0]
    hi = rows[min(i + 1, len(rows) - 1)][0]
    beta = golden_section_max(lambda b: method_metrics(method, b).am_efficiency, lo, hi)
    return beta, method_metrics(method, beta).am_efficiency


def write_reports_csv(path: str, reports: Sequence[MethodReport]) -> None:
    write_csv(
        path,
        ["method", "beta_star", "T", "eta", "C", "alpha"],
        ([r.method, r.beta, r.transmission, r.am_efficiency, r.coherence, r.alpha] for r in reports),
    )


__all__ = [
    "ConversionMethod",
    "ConversionMethods",
    "Dispersive",
    "MethodReport",
    "SidebandBounds",
    "fig2b_curve",
    "first_j1_maximum",
    "golden_section_max",
    "method_metrics",
    "method_metrics_numeric",
    "n_sideband_bound",
    "optimize_beta",
    "optimize_joint",
    "refine_curve_peak",
    "required_beta_for_optimum",
    "table_s1",
    "write_reports_csv",
]
