import math

import numpy as np
import pytest

from array_ensemble import (
    ArrayGeometry,
    BeamProfile,
    calibrate_peak_rabi,
    ensemble_rabi,
    fill_mask,
    idle_decay,
    middle_rows,
    per_atom_rabi,
    rabi_grid,
    row_rabi_spread,
    write_idle_decay_csv
)
from export import read_csv
from results import (
    ARRAY_COLS,
    ARRAY_EXTENT,
    ARRAY_ROWS,
    BACKGROUND_LIFETIME,
    BEAM_WAISTS,
    IDLE_T1,
    RABI_FREQUENCY
)


@pytest.fixture
def geom() -> ArrayGeometry:
    return ArrayGeometry.from_extent(ARRAY_ROWS, ARRAY_COLS, *ARRAY_EXTENT)


@pytest.fixture
def beam() -> BeamProfile:
    return BeamProfile(*BEAM_WAISTS, peak_rabi=1.0)


def test_geometry(geom: ArrayGeometry) -> None:
    x, y = geom.positions()
    assert x.shape == (ARRAY_ROWS, ARRAY_COLS)
    assert x[-1, 0] - x[0, 0] == pytest.approx(ARRAY_EXTENT[0])
    assert y[0, -1] - y[0, 0] == pytest.approx(ARRAY_EXTENT[1])
    assert np.mean(x) == pytest.approx(0.0, abs=1e-18)
    with pytest.raises(ValueError):
        ArrayGeometry(0, 3, 1.0, 1.0)
    with pytest.raises(ValueError):
        ArrayGeometry(2, 3, 1.0, 1.0, fill_probability=1.5)


def test_beam_validation() -> None:
    with pytest.raises(ValueError):
        BeamProfile(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        BeamProfile(1.0, 1.0, -1.0)


def test_rabi_grid_peaks_at_centre() -> None:
    geom = ArrayGeometry(3, 3, 10e-6, 10e-6)
    grid = rabi_grid(geom, BeamProfile(10e-6, 20e-6, 2.0))
    assert grid[1, 1] == pytest.approx(2.0)
    assert grid[0, 1] == pytest.approx(2.0 * math.exp(-2.0))
    assert grid[1, 0] == pytest.approx(2.0 * math.exp(-0.5))


def test_middle_rows(geom: ArrayGeometry) -> None:
    assert middle_rows(geom) == [8, 9, 10, 11]
    assert middle_rows(ArrayGeometry(3, 1, 1.0, 1.0), count=4) == [0, 1, 2]


def test_row_spread_of_middle_rows(geom: ArrayGeometry, beam: BeamProfile) -> None:
    mean, spread = row_rabi_spread(geom, beam, middle_rows(geom))
    assert 0.0 < mean < 1.0
    # rows at ±pitch/2 and ±3·pitch/2 from the beam axis
    assert spread == pytest.approx(math.expm1(4.0 * geom.pitch_x ** 2 / BEAM_WAISTS[0] ** 2), rel=1e-12)
    assert spread == pytest.approx(0.0717, abs=1e-4)
    _, all_rows = row_rabi_spread(geom, beam)
    assert all_rows > spread
    with pytest.raises(ValueError):
        row_rabi_spread(geom, beam, [25])


def test_calibration_hits_target(geom: ArrayGeometry, beam: BeamProfile) -> None:
    rows = middle_rows(geom)
    calibrated = calibrate_peak_rabi(geom, beam, RABI_FREQUENCY, rows)
    mean, _ = row_rabi_spread(geom, calibrated, rows)
    assert mean == pytest.approx(RABI_FREQUENCY)
    assert calibrated.peak_rabi > RABI_FREQUENCY


def test_fill_mask_is_seeded() -> None:
    geom = ArrayGeometry(20, 30, 1.0, 1.0, fill_probability=0.5)
    mask = fill_mask(geom, seed=3)
    np.testing.assert_array_equal(mask, fill_mask(geom, seed=3))
    assert 0.35 < np.mean(mask) < 0.65
    assert len(per_atom_rabi(geom, BeamProfile(1.0, 1.0, 1.0), mask)) == int(np.sum(mask))
    assert np.all(fill_mask(ArrayGeometry(2, 2, 1.0, 1.0)))


def test_ensemble_oscillation(geom: ArrayGeometry, beam: BeamProfile, tmp_path) -> None:
    rows = middle_rows(geom)
    calibrated = calibrate_peak_rabi(geom, beam, RABI_FREQUENCY, rows)
    result = ensemble_rabi(geom, calibrated, 3e-6, rows=rows)

    assert result.signal[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all((result.signal >= 0.0) & (result.signal <= 1.0))
    assert sorted(result.row_signals) == rows
    assert len(result.per_atom_rabi) == ARRAY_ROWS * ARRAY_COLS
    assert abs(result.fitted.params["omega"]) == pytest.approx(RABI_FREQUENCY, rel=5e-3)

    path = tmp_path / "ensemble.csv"
    result.write_csv(str(path))
    columns = read_csv(str(path))
    assert list(columns) == ["t", "signal_row8", "signal_row9", "signal_row10", "signal_row11", "signal_mean"]


def test_power_noise_adds_dephasing(geom: ArrayGeometry, beam: BeamProfile) -> None:
    rows = middle_rows(geom)
    calibrated = calibrate_peak_rabi(geom, beam, RABI_FREQUENCY, rows)
    quiet = ensemble_rabi(geom, calibrated, 3e-6, rows=rows, fit=False)
    noisy = ensemble_rabi(geom, calibrated, 3e-6, rows=rows, power_noise=0.05, shots=200, fit=False)
    assert quiet.fitted is None
    # contrast of the late oscillation shrinks with shot-to-shot power noise
    late = slice(300, None)
    assert np.ptp(noisy.signal[late]) < np.ptp(quiet.signal[late])


def single_atom() -> ArrayGeometry:
    return ArrayGeometry(1, 1, 1.0, 1.0)


def test_uniform_illumination_does_not_decay() -> None:
    geom = ArrayGeometry(4, 6, 1e-6, 1e-6)
    beam = BeamProfile(1.0, 1.0, RABI_FREQUENCY)
    result = ensemble_rabi(geom, beam, 3e-6)

    expected = 0.5 * (1.0 - np.cos(RABI_FREQUENCY * result.times))
    np.testing.assert_allclose(result.signal, expected, atol=1e-8)
    assert abs(result.fitted.params["gamma"]) * 3e-6 < 1e-4
    assert abs(result.fitted.params["omega"]) == pytest.approx(RABI_FREQUENCY, rel=1e-6)


def test_power_noise_gives_gaussian_envelope() -> None:
    sigma = 0.01
    beam = BeamProfile(1.0, 1.0, RABI_FREQUENCY)
    result = ensemble_rabi(single_atom(), beam, 10e-6, power_noise=sigma, shots=2000, fit=False)

    phase = RABI_FREQUENCY * result.times
    envelope = np.exp(-0.5 * (sigma * phase) ** 2)
    np.testing.assert_allclose(1.0 - 2.0 * result.signal, envelope * np.cos(phase), atol=0.01)


def test_decay_grows_with_rabi_spread() -> None:
    beam = BeamProfile(1.0, 1.0, RABI_FREQUENCY)
    gammas = [
        ensemble_rabi(single_atom(), beam, 8e-6, power_noise=sigma, shots=2000).fitted.params["gamma"]
        for sigma in (0.005, 0.01, 0.02)
    ]
    assert 0.0 < gammas[0] < gammas[1] < gammas[2]


def test_middle_rows_stay_in_phase_longer_than_full_array(geom: ArrayGeometry, beam: BeamProfile) -> None:
    rows = middle_rows(geom)
    calibrated = calibrate_peak_rabi(geom, beam, RABI_FREQUENCY, rows)
    # first two π times of the middle rows
    middle = ensemble_rabi(geom, calibrated, 0.6e-6, rows=rows, fit=False)
    full = ensemble_rabi(geom, calibrated, 0.6e-6, fit=False)

    assert np.max(middle.signal) > 0.98
    assert np.max(full.signal) < 0.7


def test_ensemble_checks(geom: ArrayGeometry, beam: BeamProfile) -> None:
    with pytest.raises(ValueError):
        ensemble_rabi(geom, beam, 0.0)
    with pytest.raises(ValueError):
        ensemble_rabi(geom, beam, 1e-6, rows=[])


def test_idle_decay(tmp_path) -> None:
    rows = idle_decay(IDLE_T1, BACKGROUND_LIFETIME, [0.0, IDLE_T1, 10.0])
    assert rows[0].p1_from_0 == 0.0
    assert rows[0].p1_from_1 == 1.0
    assert rows[1].p1_from_1 - rows[1].p1_from_0 == pytest.approx(math.exp(-1.0))
    assert rows[2].p1_from_0 == pytest.approx(0.5, abs=1e-9)
    assert rows[2].survival == pytest.approx(math.exp(-1.0))
    with pytest.raises(ValueError):
        idle_decay(0.0, 1.0, [0.0])

    path = tmp_path / "idle.csv"
    write_idle_decay_csv(str(path), rows)
    assert list(read_csv(str(path))) == ["hold_s", "p1_from_0", "p1_from_1", "survival"]
