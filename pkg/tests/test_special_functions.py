import math

import numpy as np
import pytest
from scipy.special import jv

from errors import (
    DomainError,
    TruncationError
)
from special_functions import (
    bessel_j,
    bessel_j_array,
    bessel_j_range,
    bessel_j_table,
    default_truncation,
    identity_even_sidebands,
    identity_pure_pm,
    identity_quadratic
)


@pytest.mark.parametrize("x", [0.0, 1e-8, 0.3, 0.999, 1.0, 1.001, 2.4048, 7.5, 19.0, 49.9])
def test_table_matches_reference(x: float) -> None:
    table = bessel_j_table(60, [x])[:, 0]
    np.testing.assert_allclose(table, jv(np.arange(61), x), atol=1e-12, rtol=0)


def test_high_order_small_argument() -> None:
    assert bessel_j(200, 1.0) == pytest.approx(jv(200, 1.0), abs=1e-12)
    assert bessel_j(150, 45.0) == pytest.approx(jv(150, 45.0), abs=1e-12)


def test_negative_order_and_argument_symmetry() -> None:
    for n in range(-7, 8):
        assert bessel_j(n, -2.3) == pytest.approx(jv(n, -2.3), abs=1e-12)
    assert bessel_j(-3, 1.7) == pytest.approx(-bessel_j(3, 1.7), abs=1e-15)


def test_array_is_vectorized() -> None:
    xs = np.linspace(-5.0, 5.0, 41)
    np.testing.assert_allclose(bessel_j_array(2, xs), jv(2, xs), atol=1e-12)


def test_range_is_centred() -> None:
    values = bessel_j_range(10, 1.336)
    assert values.size == 21
    np.testing.assert_allclose(values, jv(np.arange(-10, 11), 1.336), atol=1e-12)


def test_zero_argument() -> None:
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(5, 0.0) == 0.0


@pytest.mark.parametrize("order, x", [(201, 1.0), (3, 50.5), (0, math.nan), (0, math.inf)])
def test_domain_errors(order: int, x: float) -> None:
    with pytest.raises(DomainError):
        bessel_j(order, x)


def test_default_truncation() -> None:
    assert default_truncation(1.336) == 32
    assert default_truncation(0.0) == 30


@pytest.mark.parametrize("beta", [0.0, 0.5, 1.336, math.pi, 2.0 * math.pi])
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_pure_pm_has_no_amplitude_modulation(beta: float, k: int) -> None:
    residual = identity_pure_pm(beta, k, 40)
    assert residual.abs_error < 1e-10


def test_pure_pm_rejects_short_truncation() -> None:
    with pytest.raises(TruncationError):
        identity_pure_pm(3.0, 1, 10)


def test_pure_pm_rejects_out_of_range_beta() -> None:
    with pytest.raises(DomainError):
        identity_pure_pm(7.0, 1, 40)


@pytest.mark.parametrize("z", [0.0, 0.9, 1.336, 3.0, 6.0])
@pytest.mark.parametrize("phi", [-1.2, 0.0, 0.76, 1.5])
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_quadratic_phase_identity(z: float, phi: float, k: int) -> None:
    residual = identity_quadratic(z, phi, k, 40)
    assert residual.abs_error < 1e-10


def test_quadratic_identity_gives_dispersive_efficiency() -> None:
    residual = identity_quadratic(1.336, 0.76, 1, 40)
    assert abs(residual.rhs) == pytest.approx(abs(jv(1, 2.0 * 1.336 * math.sin(0.76))), abs=1e-10)


def test_quadratic_identity_at_zero_order() -> None:
    residual = identity_quadratic(1.336, 0.76, 0, 40)
    assert residual.lhs == pytest.approx(jv(0, 2.0 * 1.336 * math.sin(0.76)), abs=1e-12)
    assert residual.abs_error < 1e-10


def test_quadratic_identity_domain() -> None:
    with pytest.raises(DomainError):
        identity_quadratic(6.5, 0.1, 1, 40)


@pytest.mark.parametrize("beta", [0.2, 1.664, 3.574, 6.0])
def test_even_sideband_sums(beta: float) -> None:
    power, neighbours = identity_even_sidebands(beta, 40)
    assert power.abs_error < 1e-10
    assert neighbours.abs_error < 1e-10
    assert power.truncation_order == 40
