import math
from types import SimpleNamespace

import numpy as np
import pytest

import fitting
from errors import FitError
from fitting import (
    DecayModel,
    FitModels,
    dominant_frequency,
    fit_decay
)


def test_create_models() -> None:
    for x in FitModels:
        assert str(DecayModel.create(x)) == x.value
    with pytest.raises(ValueError):
        DecayModel.create("exponential")


@pytest.mark.parametrize("x", list(FitModels))
def test_jacobians_match_finite_differences(x: FitModels) -> None:
    model = DecayModel.create(x)
    xs = np.linspace(0.0, 3.0, 25)
    p = {
        FitModels.EXPONENTIAL: np.array([0.5, 1.3, 0.4]),
        FitModels.GAUSSIAN: np.array([0.5, 1.3, 0.4]),
        FitModels.THERMAL_DEPHASING: np.array([0.8, 0.7, 0.1]),
        FitModels.DAMPED_COSINE: np.array([0.5, 0.3, 4.0, 0.2, 0.5]),
    }[x]
    analytic = model.jacobian(xs, p)
    numeric = np.zeros_like(analytic)
    for i in range(p.size):
        step = np.zeros_like(p)
        step[i] = 1e-6
        numeric[:, i] = (model.evaluate(xs, p + step) - model.evaluate(xs, p - step)) / 2e-6
    np.testing.assert_allclose(analytic, numeric, atol=1e-7)


def test_exponential_recovers_parameters() -> None:
    xs = np.linspace(0.0, 20000.0, 40)
    ys = 0.5 + 0.5 * np.exp(-xs / 7852.0)
    result = fit_decay(xs, ys, FitModels.EXPONENTIAL)
    assert result.params["tau"] == pytest.approx(7852.0, rel=1e-6)
    assert result.params["c"] == pytest.approx(0.5, abs=1e-8)
    assert result.one_over_e_time == pytest.approx(7852.0, rel=1e-6)
    assert result.residual < 1e-12


def test_gaussian_with_fixed_offset() -> None:
    xs = np.linspace(0.0, 3e-3, 31)
    ys = np.exp(-(xs / 1.1e-3) ** 2)
    result = fit_decay(xs, ys, FitModels.GAUSSIAN, fixed={"c": 0.0})
    assert result.params["c"] == 0.0
    assert result.uncertainties["c"] == 0.0
    assert result.one_over_e_time == pytest.approx(1.1e-3, rel=1e-6)


def test_thermal_dephasing_one_over_e() -> None:
    xc = 1.0 / 2161.0
    xs = np.linspace(0.0, 3e-3, 31)
    ys = 1.0 / np.sqrt(1.0 + (xs / xc) ** 2)
    result = fit_decay(xs, ys, FitModels.THERMAL_DEPHASING, fixed={"c": 0.0})
    assert result.params["x_c"] == pytest.approx(xc, rel=1e-6)
    assert result.one_over_e_time == pytest.approx(xc * math.sqrt(math.e ** 2 - 1.0), rel=1e-6)
    assert result.one_over_e_time == pytest.approx(1.17e-3, rel=0.05)


def test_damped_cosine_recovers_frequency() -> None:
    omega = 2.0 * math.pi * 1.95e6
    xs = np.linspace(0.0, 3e-6, 400)
    ys = 0.5 - 0.45 * np.exp(-2e4 * xs) * np.cos(omega * xs)
    result = fit_decay(xs, ys, FitModels.DAMPED_COSINE)
    assert abs(result.params["omega"]) == pytest.approx(omega, rel=1e-6)
    assert result.params["gamma"] == pytest.approx(2e4, rel=1e-4)
    np.testing.assert_allclose(result.evaluate(xs), ys, atol=1e-8)


def test_dominant_frequency() -> None:
    xs = np.linspace(0.0, 10.0, 200)
    assert dominant_frequency(xs, np.cos(3.0 * xs)) == pytest.approx(3.0, rel=1e-2)


def test_input_checks() -> None:
    xs = np.linspace(0.0, 1.0, 10)
    with pytest.raises(ValueError):
        fit_decay(xs[:4], xs[:4], FitModels.EXPONENTIAL)
    with pytest.raises(ValueError):
        fit_decay(xs, 2.0 * np.ones(10), FitModels.EXPONENTIAL)
    with pytest.raises(ValueError):
        fit_decay(xs, xs[:5], FitModels.EXPONENTIAL)
    with pytest.raises(ValueError):
        fit_decay(xs, 0.5 * xs, FitModels.EXPONENTIAL, fixed={"omega": 1.0})
    with pytest.raises(ValueError):
        fit_decay(xs, 0.5 * xs, FitModels.EXPONENTIAL, fixed={"a": 1.0, "tau": 1.0, "c": 0.0})


def test_range_check_can_be_disabled() -> None:
    xs = np.linspace(0.0, 5.0, 20)
    ys = 3.0 * np.exp(-xs)
    result = fit_decay(xs, ys, FitModels.EXPONENTIAL, check_range=False)
    assert result.params["a"] == pytest.approx(3.0, rel=1e-6)


def test_non_convergence_raises(monkeypatch) -> None:
    def stalled(fun, x0, **kwargs):
        return SimpleNamespace(status=0, message="budget exhausted", cost=0.25, nfev=200, x=x0, jac=None)

    monkeypatch.setattr(fitting, "least_squares", stalled)
    xs = np.linspace(0.0, 1.0, 20)
    with pytest.raises(FitError) as e:
        fit_decay(xs, 0.5 + 0.4 * np.exp(-xs), FitModels.EXPONENTIAL)
    assert e.value.iterations == 200
    assert e.value.residual == pytest.approx(0.5)
