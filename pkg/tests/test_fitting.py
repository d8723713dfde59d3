import numpy as np
import pytest

from semiscat import NumericalError, fit_exponent


def test_exact_power_law():
    xs = np.array([0.5, 0.35, 0.25, 0.18, 0.125])
    vals = 3.0 * xs ** 2
    fit = fit_exponent(xs, vals)
    assert np.isclose(fit.slope, 2.0, atol=1e-12)
    assert np.isclose(fit.constant, 3.0, rtol=1e-12)
    assert fit.stderr < 1e-12
    assert fit.n_used == 5 and fit.n_dropped == 0
    assert fit.used_mask.all()


def test_negative_exponent():
    xs = np.array([0.5, 0.35, 0.25, 0.18])
    fit = fit_exponent(xs, 0.7 * xs ** -1.5)
    assert np.isclose(fit.slope, -1.5, atol=1e-12)


def test_noise_robustness():
    rng = np.random.default_rng(3)
    xs = np.geomspace(1.0, 0.05, 12)
    vals = 2.0 * xs ** 1.3 * np.exp(0.02 * rng.standard_normal(12))
    fit = fit_exponent(xs, vals)
    assert abs(fit.slope - 1.3) < 0.05
    assert fit.stderr < 0.05


def test_converged_points_dropped():
    xs = np.array([0.5, 0.35, 0.25, 0.18, 0.125, 0.09])
    vals = xs ** 3
    vals[-2:] = 1e-16  # below the convergence floor
    fit = fit_exponent(xs, vals)
    assert fit.n_dropped == 2 and fit.n_used == 4
    assert np.isclose(fit.slope, 3.0, atol=1e-10)
    assert fit.used_mask.sum() == 4


def test_too_few_points_raises():
    xs = np.array([0.5, 0.35, 0.25])
    with pytest.raises(NumericalError):
        fit_exponent(xs, xs ** 2)
    # enough points supplied, but drops leave fewer than the minimum
    xs6 = np.array([0.5, 0.35, 0.25, 0.18, 0.125, 0.09])
    vals = xs6 ** 2
    vals[:3] = 0.0
    with pytest.raises(NumericalError):
        fit_exponent(xs6, vals)


def test_invalid_values_raise():
    xs = np.array([0.5, 0.35, 0.25, 0.18])
    with pytest.raises(NumericalError):
        fit_exponent(xs, np.array([1.0, -1.0, 0.5, 0.2]))
    with pytest.raises(NumericalError):
        fit_exponent(xs, np.array([1.0, np.nan, 0.5, 0.2]))


def test_shape_mismatch():
    with pytest.raises(ValueError):
        fit_exponent(np.array([0.5, 0.35, 0.25, 0.18]),
                     np.array([1.0, 0.5, 0.2]))
