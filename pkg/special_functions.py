"""
Integer-order Bessel functions of the first kind and residual checks for the sideband
sum rules that the conversion models are built on.

Jₙ(x) comes from a direct power series for small arguments and from downward (Miller)
recurrence normalized by the sum rule J₀ + 2ΣJ₂ₖ = 1 elsewhere. Both paths are
vectorized over the argument.
"""

import logging
import math
from dataclasses import dataclass
from typing import (
    Tuple,
    Union
)

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray
)

from errors import (
    DomainError,
    TruncationError
)

logger = logging.getLogger(__name__)

MAX_ORDER = 200
MAX_ARGUMENT = 50.0
SERIES_CUTOFF = 1.0
SERIES_TERMS = 30
RESCALE_THRESHOLD = 1e250
TRUNCATION_MARGIN_PM = 20
TRUNCATION_MARGIN_QUADRATIC = 30

Number = Union[float, complex]


@dataclass(frozen=True)
class IdentityResidual:
    lhs: Number
    rhs: Number
    abs_error: float
    truncation_order: int

    @classmethod
    def of(cls, lhs: Number, rhs: Number, truncation_order: int) -> "IdentityResidual":
        return cls(lhs=lhs, rhs=rhs, abs_error=float(abs(lhs - rhs)), truncation_order=truncation_order)


def _check_domain(n_max: int, xs: NDArray) -> None:
    if n_max > MAX_ORDER:
        raise DomainError(f"Bessel order {n_max} exceeds the supported range |n| <= {MAX_ORDER}")
    if xs.size > 0 and (not np.all(np.isfinite(xs)) or np.max(np.abs(xs)) > MAX_ARGUMENT):
        raise DomainError(f"Bessel argument outside the supported range |x| <= {MAX_ARGUMENT}")


def _series_table(n_max: int, xs: NDArray) -> NDArray:
    table = np.zeros((n_max + 1, xs.size))
    half = xs / 2.0
    half_sq = half * half
    with np.errstate(divide="ignore"):
        log_half = np.log(half)
    for n in range(n_max + 1):
        if n == 0:
            term = np.ones_like(xs)
        else:
            term = np.where(xs > 0.0, np.exp(n * log_half - math.lgamma(n + 1)), 0.0)
        total = term.copy()
        for k in range(1, SERIES_TERMS):
            term = -term * half_sq / (k * (k + n))
            total += term
        table[n] = total
    return table


def _miller_table(n_max: int, xs: NDArray) -> NDArray:
    reach = max(n_max, int(math.ceil(float(np.max(xs)))))
    start = reach + 40 + int(math.sqrt(40 * reach))
    start += start % 2

    table = np.zeros((n_max + 1, xs.size))
    j_next = np.zeros_like(xs)
    j_cur = np.full_like(xs, 1e-30)
    norm = np.zeros_like(xs)
    for k in range(start, 0, -1):
        j_prev = (2.0 * k / xs) * j_cur - j_next
        if k <= n_max:
            table[k] = j_cur
        if k % 2 == 0:
            norm += 2.0 * j_cur
        j_next, j_cur = j_cur, j_prev

        overflow = np.abs(j_cur) > RESCALE_THRESHOLD
        if np.any(overflow):
            j_cur[overflow] /= RESCALE_THRESHOLD
            j_next[overflow] /= RESCALE_THRESHOLD
            norm[overflow] /= RESCALE_THRESHOLD
            table[:, overflow] /= RESCALE_THRESHOLD

    table[0] = j_cur
    norm += j_cur
    return table / norm


def bessel_j_table(n_max: int, xs: ArrayLike) -> NDArray:
    """
    Returns Jₙ(x) for n = 0..n_max as an array of shape (n_max + 1, len(xs)).
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if n_max < 0:
        raise DomainError(f"n_max must be non-negative, got {n_max}")
    _check_domain(n_max, xs)

    ax = np.abs(xs)
    table = np.zeros((n_max + 1, xs.size))
    small = ax <= SERIES_CUTOFF
    if np.any(small):
        table[:, small] = _series_table(n_max, ax[small])
    if np.any(~small):
        table[:, ~small] = _miller_table(n_max, ax[~small])

    negative = xs < 0.0
    if np.any(negative):
        odd = np.arange(n_max + 1) % 2 == 1
        table[np.ix_(odd, negative)] *= -1.0
    return table


def bessel_j_array(order: int, xs: ArrayLike) -> NDArray:
    n = abs(int(order))
    values = bessel_j_table(n, xs)[n]
    if order < 0 and n % 2 == 1:
        values = -values
    return values


def bessel_j(order: int, x: float) -> float:
    """
    Jₙ(x) for |n| <= 200 and |x| <= 50, accurate to about 1e-12 absolute.
    """
    return float(bessel_j_array(order, [x])[0])


def bessel_j_range(n_max: int, x: float) -> NDArray:
    """
    Returns J₋ₙ..Jₙ(x) for n = n_max, indexed so that element i holds J_{i - n_max}(x).
    """
    positive = bessel_j_table(n_max, [x])[:, 0]
    signs = np.where(np.arange(1, n_max + 1) % 2 == 1, -1.0, 1.0)
    negative = (positive[1:] * signs)[::-1]
    return np.concatenate([negative, positive])


def default_truncation(argument: float) -> int:
    return int(math.ceil(abs(argument))) + TRUNCATION_MARGIN_QUADRATIC


def _check_truncation(trunc: int, argument: float, margin: int) -> None:
    minimum = int(math.ceil(argument)) + margin
    if trunc < minimum:
        raise TruncationError(f"truncation order {trunc} is below the minimum {minimum} for argument {argument}")


def _check_beta(beta: float) -> None:
    if not 0.0 <= beta <= 2.0 * math.pi:
        raise DomainError(f"modulation depth must lie in [0, 2π], got {beta}")


def _shifted_products(beta: float, k: int, trunc: int) -> Tuple[NDArray, NDArray]:
    reach = trunc + abs(k)
    values = bessel_j_range(reach, beta)
    n = np.arange(-trunc, trunc + 1)
    return n, values[n + reach] * values[n + k + reach]


def identity_pure_pm(beta: float, k: int, trunc: int) -> IdentityResidual:
    """
    Σₙ Jₙ(β)Jₙ₊ₖ(β) = δₖ₀: pure phase modulation carries no amplitude modulation.
    """
    _check_beta(beta)
    _check_truncation(trunc, beta, TRUNCATION_MARGIN_PM)

    _, products = _shifted_products(beta, k, trunc)
    lhs = float(np.sum(products))
    rhs = 1.0 if k == 0 else 0.0
    return IdentityResidual.of(lhs, rhs, trunc)


def identity_quadratic(z: float, phi: float, k: int, trunc: int) -> IdentityResidual:
    """
    Jₖ(2z sin φ) = (−i)ᵏ e^{ikφ} Σₙ Jₙ(z)Jₙ₊ₖ(z) e^{2inφ}.
    """
    if not 0.0 <= z <= 6.0:
        raise DomainError(f"z must lie in [0, 6], got {z}")
    _check_truncation(trunc, z, TRUNCATION_MARGIN_QUADRATIC)

    lhs = bessel_j(k, 2.0 * z * math.sin(phi))
    n, products = _shifted_products(z, k, trunc)
    rhs = complex((-1j) ** k * np.exp(1j * k * phi) * np.sum(products * np.exp(2j * n * phi)))
    return IdentityResidual.of(lhs, rhs, trunc)


def identity_even_sidebands(beta: float, trunc: int) -> Tuple[IdentityResidual, IdentityResidual]:
    """
    Power and second-neighbour overlap of the even-index sidebands:
    Σ_{n even} Jₙ(β)² = ½(1 + J₀(2β)) and Σ_{n even} Jₙ(β)Jₙ₊₂(β) = ½J₂(2β).
    """
    _check_beta(beta)
    _check_truncation(trunc, beta, TRUNCATION_MARGIN_PM)

    n, squares = _shifted_products(beta, 0, trunc)
    even = n % 2 == 0
    power = IdentityResidual.of(
        float(np.sum(squares[even])),
        0.5 * (1.0 + bessel_j(0, 2.0 * beta)),
        trunc,
    )

    n, neighbours = _shifted_products(beta, 2, trunc)
    even = n % 2 == 0
    overlap = IdentityResidual.of(
        float(np.sum(neighbours[even])),
        0.5 * bessel_j(2, 2.0 * beta),
        trunc,
    )
    return power, overlap


__all__ = [
    "IdentityResidual",
    "bessel_j",
    "bessel_j_array",
    "bessel_j_range",
    "bessel_j_table",
    "default_truncation",
    "identity_even_sidebands",
    "identity_pure_pm",
    "identity_quadratic",
]
