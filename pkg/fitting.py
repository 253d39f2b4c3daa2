import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import (
    Dict,
    Mapping,
    Optional,
    Tuple
)

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray
)
from scipy.optimize import least_squares

from errors import FitError

logger = logging.getLogger(__name__)

MIN_POINTS = 5
SIGNAL_RANGE = (-0.1, 1.1)
MAX_ITERATIONS = 200
STEP_TOLERANCE = 1e-9
FFT_PADDING = 8


class FitModels(Enum):
    EXPONENTIAL = "exponential"
    GAUSSIAN = "gaussian"
    DAMPED_COSINE = "damped_cosine"
    THERMAL_DEPHASING = "thermal_dephasing"


class DecayModel(object):
    PARAMS: Tuple[str, ...] = ()

    def evaluate(self, xs: NDArray, p: NDArray) -> NDArray:
        raise NotImplementedError()

    def jacobian(self, xs: NDArray, p: NDArray) -> NDArray:
        raise NotImplementedError()

    def initial_guess(self, xs: NDArray, ys: NDArray) -> NDArray:
        raise NotImplementedError()

    def one_over_e_time(self, params: Mapping[str, float]) -> float:
        raise NotImplementedError()

    def __str__(self) -> str:
        raise NotImplementedError()

    @classmethod
    def create(cls, x: FitModels):
        if x is FitModels.EXPONENTIAL:
            return Exponential()
        elif x is FitModels.GAUSSIAN:
            return Gaussian()
        elif x is FitModels.DAMPED_COSINE:
            return DampedCosine()
        elif x is FitModels.THERMAL_DEPHASING:
            return ThermalDephasing()
        else:
            raise ValueError(f"Cannot create {cls.__name__} of type `{x}`")


def _decay_guess(xs: NDArray, ys: NDArray) -> NDArray:
    offset = float(ys[-1])
    amplitude = float(ys[0]) - offset
    if amplitude == 0.0:
        return np.array([1e-12, (xs[-1] - xs[0]) / 3.0 or 1.0, offset])
    below = np.nonzero(np.abs(ys - offset) < abs(amplitude) / math.e)[0]
    scale = float(xs[below[0]] - xs[0]) if below.size > 0 else float(xs[-1] - xs[0])
    return np.array([amplitude, max(scale, 1e-3 * float(xs[-1] - xs[0])), offset])


class Exponential(DecayModel):
    """y = a·exp(−x/τ) + c"""

    PARAMS = ("a", "tau", "c")

    def evaluate(self, xs: NDArray, p: NDArray) -> NDArray:
        a, tau, c = p
        return a * np.exp(-xs / tau) + c

    def jacobian(self, xs: NDArray, p: NDArray) -> NDArray:
        a, tau, _ = p
        e = np.exp(-xs / tau)
        return np.stack([e, a * e * xs / (tau * tau), np.ones_like(xs)], axis=1)

    def initial_guess(self, xs: NDArray, ys: NDArray) -> NDArray:
        return _decay_guess(xs, ys)

    def one_over_e_time(self, params: Mapping[str, float]) -> float:
        return params["tau"]

    def __str__(self) -> str:
        return FitModels.EXPONENTIAL.value


class Gaussian(DecayModel):
    """y = a·exp(−(x/τ)²) + c"""

    PARAMS = ("a", "tau", "c")

    def evaluate(self, xs: NDArray, p: NDArray) -> NDArray:
        a, tau, c = p
        return a * np.exp(-(xs / tau) ** 2) + c

    def jacobian(self, xs: NDArray, p: NDArray) -> NDArray:
        a, tau, _ = p
        e = np.exp(-(xs / tau) ** 2)
        return np.stack([e, a * e * 2.0 * xs * xs / tau ** 3, np.ones_like(xs)], axis=1)

    def initial_guess(self, xs: NDArray, ys: NDArray) -> NDArray:
        return _decay_guess(xs, ys)

    def one_over_e_time(self, params: Mapping[str, float]) -> float:
        return abs(params["tau"])

    def __str__(self) -> str:
        return FitModels.GAUSSIAN.value


class ThermalDephasing(DecayModel):
    """
    y = a / √(1 + (x/x_c)²) + c, the Ramsey contrast of an exponential distribution of static
    detunings with mean 1/x_c. It reaches a/e at x_c·√(e² − 1).
    """

    PARAMS = ("a", "x_c", "c")

    def evaluate(self, xs: NDArray, p: NDArray) -> NDArray:
        a, xc, c = p
        return a / np.sqrt(1.0 + (xs / xc) ** 2) + c

    def jacobian(self, xs: NDArray, p: NDArray) -> NDArray:
        a, xc, _ = p
        base = 1.0 + (xs / xc) ** 2
        return np.stack(
            [base ** -0.5, a * base ** -1.5 * xs * xs / xc ** 3, np.ones_like(xs)],
            axis=1,
        )

    def initial_guess(self, xs: NDArray, ys: NDArray) -> NDArray:
        a, tau, c = _decay_guess(xs, ys)
        return np.array([a, tau / math.sqrt(math.e ** 2 - 1.0), c])

    def one_over_e_time(self, params: Mapping[str, float]) -> float:
        return abs(params["x_c"]) * math.sqrt(math.e ** 2 - 1.0)

    def __str__(self) -> str:
        return FitModels.THERMAL_DEPHASING.value


class DampedCosine(DecayModel):
    """y = c + a·exp(−γx)·cos(ωx + φ)"""

    PARAMS = ("a", "gamma", "omega", "phi", "c")

    def evaluate(self, xs: NDArray, p: NDArray) -> NDArray:
        a, gamma, omega, phi, c = p
        return c + a * np.exp(-gamma * xs) * np.cos(omega * xs + phi)

    def jacobian(self, xs: NDArray, p: NDArray) -> NDArray:
        a, gamma, omega, phi, _ = p
        e = np.exp(-gamma * xs)
        cos = np.cos(omega * xs + phi)
        sin = np.sin(omega * xs + phi)
        return np.stack(
            [e * cos, -a * xs * e * cos, -a * xs * e * sin, -a * e * sin, np.ones_like(xs)],
            axis=1,
        )

    def initial_guess(self, xs: NDArray, ys: NDArray) -> NDArray:
        offset = float(np.mean(ys))
        omega = dominant_frequency(xs, ys - offset)

        # amplitude and phase from the linear problem at fixed ω
        basis = np.stack([np.cos(omega * xs), np.sin(omega * xs)], axis=1)
        (u, v), *_ = np.linalg.lstsq(basis, ys - offset, rcond=None)
        return np.array([math.hypot(u, v), 0.0, omega, math.atan2(-v, u), offset])

    def one_over_e_time(self, params: Mapping[str, float]) -> float:
        gamma = params["gamma"]
        return math.inf if gamma <= 0.0 else 1.0 / gamma

    def __str__(self) -> str:
        return FitModels.DAMPED_COSINE.value


def dominant_frequency(xs: ArrayLike, ys: ArrayLike) -> float:
    """Angular frequency of the strongest non-DC component of uniformly sampled data."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    step = (xs[-1] - xs[0]) / (xs.size - 1)
    size = FFT_PADDING * xs.size
    power = np.abs(np.fft.rfft(ys - np.mean(ys), n=size)) ** 2
    k = int(np.argmax(power[1:])) + 1

    shift = 0.0
    if 0 < k < power.size - 1:
        left, centre, right = power[k - 1], power[k], power[k + 1]
        denominator = left - 2.0 * centre + right
        if denominator != 0.0:
            shift = 0.5 * (left - right) / denominator
    return 2.0 * math.pi * (k + shift) / (size * step)


@dataclass(frozen=True)
class FitResult:
    model: FitModels
    params: Dict[str, float]
    uncertainties: Dict[str, float]
    residual: float
    iterations: int

    @property
    def one_over_e_time(self) -> float:
        return DecayModel.create(self.model).one_over_e_time(self.params)

    def evaluate(self, xs: ArrayLike) -> NDArray:
        model = DecayModel.create(self.model)
        p = np.array([self.params[name] for name in model.PARAMS])
        return model.evaluate(np.asarray(xs, dtype=float), p)


def fit_decay(
    xs: ArrayLike,
    ys: ArrayLike,
    model: FitModels,
    fixed: Optional[Mapping[str, float]] = None,
    initial: Optional[Mapping[str, float]] = None,
    check_range: bool = True,
) -> FitResult:
    """
    Levenberg-Marquardt fit with analytic Jacobian. Parameters named in `fixed` are held at the
    given values and reported with zero uncertainty.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-D arrays of equal length")
    if xs.size < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} points, got {xs.size}")
    if check_range and (np.min(ys) < SIGNAL_RANGE[0] or np.max(ys) > SIGNAL_RANGE[1]):
        raise ValueError(f"signal values must lie in {list(SIGNAL_RANGE)}")

    shape = DecayModel.create(model)
    fixed = dict(fixed or {})
    for name in list(fixed) + list(initial or {}):
        if name not in shape.PARAMS:
            raise ValueError(f"`{name}` is not a parameter of the {shape} model")

    start = shape.initial_guess(xs, ys)
    for name, value in (initial or {}).items():
        start[shape.PARAMS.index(name)] = value
    for name, value in fixed.items():
        start[shape.PARAMS.index(name)] = value
    free = np.array([name not in fixed for name in shape.PARAMS])
    if not np.any(free):
        raise ValueError("at least one parameter must be free")
    if int(np.sum(free)) >= xs.size:
        raise ValueError("more free parameters than data points")

    def full(q: NDArray) -> NDArray:
        p = start.copy()
        p[free] = q
        return p

    result = least_squares(
        lambda q: shape.evaluate(xs, full(q)) - ys,
        start[free],
        jac=lambda q: shape.jacobian(xs, full(q))[:, free],
        method="lm",
        xtol=STEP_TOLERANCE,
        ftol=1e-15,
        gtol=1e-15,
        x_scale="jac",
        max_nfev=MAX_ITERATIONS,
    )
    residual = float(2.0 * result.cost)
    if result.status <= 0:
        raise FitError(f"{shape} fit did not converge: {result.message}", residual, int(result.nfev))

    dof = xs.size - int(np.sum(free))
    jac = result.jac
    covariance = np.linalg.pinv(jac.T @ jac) * (residual / dof)
    sigma = np.zeros(len(shape.PARAMS))
    sigma[free] = np.sqrt(np.abs(np.diag(covariance)))

    p = full(result.x)
    logger.debug(f"{shape} fit converged after {result.nfev} evaluations, residual {residual:.3g}")
    return FitResult(
        model=model,
        params={name: float(v) for name, v in zip(shape.PARAMS, p)},
        uncertainties={name: float(s) for name, s in zip(shape.PARAMS, sigma)},
        residual=residual,
        iterations=int(result.nfev),
    )


__all__ = [
    "DecayModel",
    "FitModels",
    "FitResult",
    "dominant_frequency",
    "fit_decay",
]
