import math

import numpy as np
import pytest

from conversion import first_j1_maximum
from dispersion import (
    QUBIT_FREQUENCY_RB87,
    DispersiveElement,
    DispersiveElements,
    alpha_from_gdd,
    catalogue,
    fiber,
    fiber_length_for_gdd,
    fig1e_dataset,
    gdd_for_alpha,
    gdd_per_meter_to_gvd,
    gvd_to_gdd_per_meter,
    reflect,
    write_fig1e_csv
)
from errors import DomainError
from export import read_csv
from spectrum import (
    am_efficiency,
    phase_modulate
)


def test_create_catalogue() -> None:
    elements = catalogue()
    assert [e.label for e in elements] == [x.value for x in DispersiveElements]
    double = DispersiveElement.create(DispersiveElements.CBG_DOUBLE_BOUNCE)
    assert double.gdd_fs2 == 8e8
    assert DispersiveElement.create(DispersiveElements.FIBER_10M).gdd_fs2 == pytest.approx(4e5)
    with pytest.raises(ValueError):
        DispersiveElement.create("cbg")


def test_element_validation() -> None:
    with pytest.raises(DomainError):
        DispersiveElement(0.0, 1.0)
    with pytest.raises(DomainError):
        DispersiveElement(1.0, 0.0)
    with pytest.raises(DomainError):
        fiber(-1.0)


def test_fiber_attenuation() -> None:
    assert fiber(10.0).transmission == pytest.approx(10.0 ** -0.004)
    assert fiber(20e3).attenuation_db == pytest.approx(80.0)


def test_curvature_of_double_bounce() -> None:
    double = DispersiveElement.create(DispersiveElements.CBG_DOUBLE_BOUNCE)
    curvature = alpha_from_gdd(double, QUBIT_FREQUENCY_RB87)
    assert curvature.alpha == pytest.approx(0.7302, abs=1e-3)
    assert curvature.wraps == 0

    single = DispersiveElement.create(DispersiveElements.CBG)
    assert alpha_from_gdd(single, QUBIT_FREQUENCY_RB87, reflections=2).alpha == pytest.approx(curvature.alpha)


def test_curvature_wraps_modulo_pi() -> None:
    element = DispersiveElement(4e9, 1.0)
    curvature = alpha_from_gdd(element, QUBIT_FREQUENCY_RB87)
    assert 0.0 <= curvature.alpha < math.pi
    assert curvature.unwrapped == pytest.approx(curvature.alpha + curvature.wraps * math.pi)
    assert curvature.wraps == 1


def test_curvature_checks() -> None:
    element = DispersiveElement.create(DispersiveElements.CBG)
    with pytest.raises(DomainError):
        alpha_from_gdd(element, 0.0)
    with pytest.raises(DomainError):
        alpha_from_gdd(element, 1.0, reflections=0)


def test_gvd_conversions() -> None:
    gdd = gvd_to_gdd_per_meter(-120.0)
    assert gdd > 0.0
    assert gdd_per_meter_to_gvd(gdd) == pytest.approx(-120.0)
    assert fiber_length_for_gdd(4e5) == pytest.approx(10.0)


def test_gdd_for_alpha_inverts_curvature() -> None:
    gdd, loss_db = gdd_for_alpha(0.73, QUBIT_FREQUENCY_RB87)
    assert alpha_from_gdd(DispersiveElement(gdd, 1.0), QUBIT_FREQUENCY_RB87).alpha == pytest.approx(0.73)
    assert loss_db == pytest.approx(4.0 * gdd / 4e4 / 1e3)


def test_reflect_applies_curvature_inside_window() -> None:
    element = DispersiveElement.create(DispersiveElements.CBG_DOUBLE_BOUNCE)
    alpha = alpha_from_gdd(element, QUBIT_FREQUENCY_RB87).alpha
    spec = phase_modulate(1.336, QUBIT_FREQUENCY_RB87, 32)

    out = reflect(spec, element)
    # ±3 sidebands fit in the 50 GHz window at 6.8 GHz spacing
    assert out.amplitude(3) != 0j
    assert out.amplitude(4) == 0j
    assert out.total_power < 1.0
    np.testing.assert_allclose(out.amplitude(2), spec.amplitude(2) * np.exp(4j * alpha), atol=1e-14)


def test_reflect_broadband_keeps_power() -> None:
    element = DispersiveElement(2.0 * 0.76 / QUBIT_FREQUENCY_RB87 ** 2 / 1e-30, 2.0 * math.pi * 10e12)
    out = reflect(phase_modulate(1.336, QUBIT_FREQUENCY_RB87, 32), element)
    assert out.total_power == pytest.approx(1.0, abs=1e-12)
    assert am_efficiency(out) == pytest.approx(0.582, abs=1e-3)


def test_reflect_attenuates_without_changing_efficiency() -> None:
    spec = phase_modulate(1.336, QUBIT_FREQUENCY_RB87, 32)
    lossy = fiber(1e3)
    lossless = DispersiveElement(lossy.gdd_fs2, lossy.bandwidth)

    out = reflect(spec, lossy)
    assert out.total_power == pytest.approx(10.0 ** -0.4, rel=1e-12)
    assert am_efficiency(out) == pytest.approx(am_efficiency(reflect(spec, lossless)), rel=1e-12)


def test_reflect_window_follows_center_offset() -> None:
    element = DispersiveElement.create(DispersiveElements.CBG, center_offset=2.0 * math.pi * 10e9)
    out = reflect(phase_modulate(1.336, QUBIT_FREQUENCY_RB87, 32), element)
    # offsets n·6.8 GHz + 10 GHz inside ±25 GHz keep n = -5..2
    assert out.amplitude(2) != 0j
    assert out.amplitude(3) == 0j
    assert out.amplitude(-5) != 0j
    assert out.amplitude(-6) == 0j


def test_fig1e_reachability(tmp_path) -> None:
    rows = {r.label: r for r in fig1e_dataset(catalogue())}
    double = rows[DispersiveElements.CBG_DOUBLE_BOUNCE.value]
    assert double.reachable
    assert double.required_beta == pytest.approx(first_j1_maximum() / (2.0 * math.sin(double.alpha)))
    assert double.required_beta == pytest.approx(1.38, abs=0.01)

    fiber_row = rows[DispersiveElements.FIBER_10M.value]
    assert fiber_row.alpha == pytest.approx(3.65e-4, rel=1e-2)
    assert fiber_row.required_beta > 100.0 * math.pi
    assert rows[DispersiveElements.CHIRPED_MIRROR.value].required_beta > 100.0 * math.pi
    assert not fiber_row.reachable

    path = tmp_path / "fig1e.csv"
    write_fig1e_csv(str(path), list(rows.values()))
    columns = read_csv(str(path))
    assert list(columns) == ["label", "gdd_fs2", "alpha_rad", "required_beta_rad", "reachable"]
    assert len(columns["label"]) == len(DispersiveElements)


def test_fig1e_needs_elements() -> None:
    with pytest.raises(ValueError):
        fig1e_dataset([])
