import json
import math

import numpy as np
import pytest
from scipy.special import jv

from errors import (
    DegenerateSpectrumError,
    DomainError,
    TruncationError
)
from spectrum import (
    FilterKind,
    FilterKinds,
    SidebandSpectrum,
    am_efficiency,
    apply_filter,
    apply_quadratic_phase,
    beat_time_grid,
    field_waveform,
    harmonic_coefficient,
    intensity_waveform,
    mach_zehnder_output,
    overlap,
    phase_modulate
)


def test_phase_modulation_amplitudes() -> None:
    spec = phase_modulate(1.336, 2.0, 32)
    assert spec.n_max == 32
    assert spec.mod_frequency == 2.0
    assert spec.amplitude(1) == pytest.approx(jv(1, 1.336), abs=1e-12)
    assert spec.amplitude(-1) == pytest.approx(-jv(1, 1.336), abs=1e-12)
    assert spec.amplitude(40) == 0j
    assert spec.total_power == pytest.approx(1.0, abs=1e-12)


def test_phase_modulation_checks() -> None:
    with pytest.raises(DomainError):
        phase_modulate(-0.1, 1.0, 30)
    with pytest.raises(TruncationError):
        phase_modulate(2.0, 1.0, 21)


@pytest.mark.parametrize("beta", [0.4, 1.336, 3.0])
def test_pure_pm_carries_no_amplitude_modulation(beta: float) -> None:
    spec = phase_modulate(beta, 1.0, 40)
    for k in (1, 2, 3):
        assert abs(overlap(spec, k)) < 1e-12


@pytest.mark.parametrize("beta, alpha", [(1.336, 0.76), (0.5, 0.3), (2.0, 1.2)])
def test_quadratic_phase_efficiency(beta: float, alpha: float) -> None:
    spec = apply_quadratic_phase(phase_modulate(beta, 1.0, 40), alpha)
    assert am_efficiency(spec, 1) == pytest.approx(abs(jv(1, 2.0 * beta * math.sin(alpha))), abs=1e-10)
    assert spec.total_power == pytest.approx(1.0, abs=1e-12)


def test_quadratic_phase_shift_by_pi_keeps_efficiency() -> None:
    base = phase_modulate(1.0, 1.0, 30)
    a = apply_quadratic_phase(base, 0.4)
    b = apply_quadratic_phase(base, 0.4 + math.pi)
    # e^{iπn²} = (−1)ⁿ
    np.testing.assert_allclose(b.amplitudes, a.amplitudes * (-1.0) ** np.abs(base.indices), atol=1e-12)
    assert am_efficiency(b) == pytest.approx(am_efficiency(a), abs=1e-12)


def test_overlap_conjugate_symmetry() -> None:
    spec = apply_quadratic_phase(phase_modulate(1.0, 1.0, 30), 0.7)
    assert overlap(spec, -1) == pytest.approx(overlap(spec, 1).conjugate(), abs=1e-14)
    assert overlap(spec, 0).real == pytest.approx(spec.total_power)
    assert overlap(spec, 100) == 0j


def test_am_efficiency_requires_positive_order() -> None:
    with pytest.raises(ValueError):
        am_efficiency(phase_modulate(1.0, 1.0, 30), 0)


def test_filters() -> None:
    spec = phase_modulate(1.0, 1.0, 30)
    no_carrier = apply_filter(spec, FilterKind.remove_carrier())
    assert no_carrier.amplitude(0) == 0j
    assert no_carrier.total_power == pytest.approx(1.0 - jv(0, 1.0) ** 2, abs=1e-12)

    even = apply_filter(spec, FilterKind.remove_odd_sidebands())
    assert even.amplitude(1) == 0j
    assert even.total_power == pytest.approx(0.5 * (1.0 + jv(0, 2.0)), abs=1e-12)

    kept = apply_filter(spec, FilterKind.keep_indices([-1, 1]))
    assert kept.total_power == pytest.approx(2.0 * jv(1, 1.0) ** 2, abs=1e-12)
    assert FilterKind.keep_indices([1]).kind is FilterKinds.KEEP_INDICES


def test_filter_removing_everything_is_degenerate() -> None:
    spec = SidebandSpectrum.from_components({0: 1.0}, 1.0)
    with pytest.raises(DegenerateSpectrumError):
        apply_filter(spec, FilterKind.remove_carrier())


def test_keep_filter_needs_indices() -> None:
    with pytest.raises(ValueError):
        FilterKind(FilterKinds.KEEP_INDICES)


def test_spectrum_validation() -> None:
    with pytest.raises(ValueError):
        SidebandSpectrum(np.ones(4), 1.0)
    with pytest.raises(ValueError):
        SidebandSpectrum(np.array([1.0, 1.0, 1.0]), 1.0)
    with pytest.raises(DegenerateSpectrumError):
        SidebandSpectrum(np.zeros(3), 1.0)
    with pytest.raises(ValueError):
        SidebandSpectrum(np.array([0.0, 1.0, 0.0]), 1.0, carrier_power_scale=0.0)


def test_amplitudes_are_read_only() -> None:
    spec = phase_modulate(1.0, 1.0, 30)
    with pytest.raises(ValueError):
        spec.amplitudes[0] = 1.0


def test_json_round_trip() -> None:
    spec = apply_quadratic_phase(phase_modulate(1.336, 4.0, 32), 0.76).with_power_scale(2.5)
    restored = SidebandSpectrum.from_json(json.loads(spec.dumps()))
    np.testing.assert_allclose(restored.amplitudes, spec.amplitudes, atol=0)
    assert restored.mod_frequency == 4.0
    assert restored.carrier_power_scale == 2.5


def test_mach_zehnder_intensity() -> None:
    beta = 1.2
    spec = phase_modulate(beta, 1.0, 30)
    out = mach_zehnder_output(spec, math.pi / 2.0)
    times = beat_time_grid(out, samples=256)
    expected = 0.5 * (1.0 - np.cos(math.pi / 2.0 + beta * np.sin(times)))
    np.testing.assert_allclose(intensity_waveform(out, times), expected, atol=1e-12)
    assert out.total_power == pytest.approx(0.5, abs=1e-12)


def test_waveforms_and_harmonics() -> None:
    spec = SidebandSpectrum.from_components({0: math.sqrt(0.5), 1: math.sqrt(0.5)}, 2.0, carrier_power_scale=3.0)
    times = beat_time_grid(spec, samples=64)
    assert times.size == 64
    assert times[1] == pytest.approx(spec.beat_period / 64)

    field = field_waveform(spec, times)
    np.testing.assert_allclose(field, math.sqrt(0.5) * (1.0 + np.exp(2j * times)), atol=1e-12)

    waveform = intensity_waveform(spec, times)
    assert harmonic_coefficient(waveform, 0).real == pytest.approx(3.0, abs=1e-12)
    assert abs(harmonic_coefficient(waveform, 1)) == pytest.approx(1.5, abs=1e-12)

    with pytest.raises(ValueError):
        intensity_waveform(spec, [])
