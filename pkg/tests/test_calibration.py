"""
Lorentzian fitting and the FRF scaling factor.
"""
import math

import numpy as np
import pytest

from common.oscillator.calibration import (
    FrfSweep,
    LorentzianFit,
    fit_lorentzian,
    lorentzian_value,
    scaling_factor,
    simulate_frf,
)
from common.oscillator.model import HybridStiffness, ParamVector
from common.shared.errors import CalibrationError, NoPeak, ZeroMaximum

ETA = 6_940_000.7
D = math.pi * 40.0
A_PEAK = 100e-6
GRID = np.linspace(6_939_500.0, 6_940_500.0, 401)
HYBRID = HybridStiffness(6_940_000.0, 7_030_000.0)


@pytest.mark.parametrize("xi", [0.0, 1e-6])
def test_noiseless_self_fit_recovers_parameters(xi):
    sweep = FrfSweep(GRID, lorentzian_value(GRID, ETA, D, A_PEAK, xi), noise_floor=xi)
    fit = fit_lorentzian(sweep)
    assert fit.eta == pytest.approx(ETA, rel=1e-8)
    assert fit.d == pytest.approx(D, rel=1e-8)
    assert fit.a_peak == pytest.approx(A_PEAK, rel=1e-8)
    assert fit.linewidth_hz == pytest.approx(40.0, rel=1e-8)


def test_noisy_fit_locates_resonance_on_most_seeds():
    xi = 1e-6
    clean = lorentzian_value(GRID, ETA, D, A_PEAK, xi)
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        noisy = clean + rng.uniform(-xi / 10, xi / 10, GRID.size)
        fit = fit_lorentzian(FrfSweep(GRID, noisy, noise_floor=xi))
        if abs(fit.eta - ETA) <= 40.0 / 10:
            hits += 1
    assert hits >= 95


def test_squared_target_recovers_squared_curve():
    squared = lorentzian_value(GRID, ETA, D, A_PEAK**2, 0.0)
    fit = fit_lorentzian(FrfSweep(GRID, np.sqrt(squared)), squared=True)
    assert fit.squared
    assert fit.eta == pytest.approx(ETA, rel=1e-8)
    assert fit.d == pytest.approx(D, rel=1e-6)
    assert fit.peak_amplitude == pytest.approx(A_PEAK, rel=1e-6)


def test_squared_fit_of_oscillator_width_is_pi_times_damping():
    p = ParamVector(0.0, 20.0, 120.0)
    sweep = FrfSweep(GRID, simulate_frf(p, HYBRID, GRID, channel=1))
    fit = fit_lorentzian(sweep, squared=True)
    assert fit.d == pytest.approx(math.pi * 20.0, rel=1e-2)
    assert fit.eta == pytest.approx(HYBRID.eta_plus, abs=1.0)
    assert fit.quality == pytest.approx(HYBRID.eta_plus / 20.0, rel=1e-2)


def test_flat_zero_sweep_has_no_peak():
    with pytest.raises(NoPeak):
        fit_lorentzian(FrfSweep(GRID, np.zeros(GRID.size)))


def test_peak_below_three_noise_floors_has_no_peak():
    sweep = FrfSweep(GRID, np.full(GRID.size, 2e-6), noise_floor=1e-6)
    with pytest.raises(NoPeak):
        fit_lorentzian(sweep)


def test_short_sweep_is_rejected():
    with pytest.raises(CalibrationError):
        fit_lorentzian(FrfSweep(GRID[:4], np.ones(4)))


def test_fit_summary_fields():
    fit = LorentzianFit(eta=1000.0, d=math.pi * 2.0, a_peak=4.0, residual_rms=0.0, squared=True)
    summary = fit.to_dict()
    assert summary["linewidth_Hz"] == pytest.approx(2.0)
    assert summary["Q"] == pytest.approx(500.0)
    assert summary["A_peak_V"] == pytest.approx(2.0)
    assert summary["target"] == "squared"


def test_lorentzian_rejects_non_positive_width():
    with pytest.raises(ValueError):
        lorentzian_value(1.0, 1.0, 0.0, 1.0, 0.0)


def test_scaling_factor_is_ratio_of_maxima():
    p = ParamVector(1.9, 20.0, 120.0)
    lab = FrfSweep(GRID, 3.0 * simulate_frf(p, HYBRID, GRID, channel=1))
    assert scaling_factor(p, lab, HYBRID, GRID, channel=1) == pytest.approx(3.0, rel=1e-12)


def test_scaling_factor_needs_positive_lab_maximum():
    with pytest.raises(ZeroMaximum):
        scaling_factor(ParamVector(1.9, 20.0, 120.0), FrfSweep(GRID, np.zeros(GRID.size)), HYBRID, GRID)


def test_above_floor_subtracts_and_clips():
    sweep = FrfSweep(GRID[:3], np.array([0.5, 3.0, 1.5]), noise_floor=1.0)
    cleaned = sweep.above_floor()
    np.testing.assert_array_equal(cleaned.amplitudes, [0.0, 2.0, 0.5])
    assert cleaned.noise_floor == 0.0
    bare = FrfSweep(GRID[:3], np.ones(3))
    assert bare.above_floor() is bare


def test_sweep_validation():
    with pytest.raises(ValueError):
        FrfSweep(GRID, -np.ones(GRID.size))
    with pytest.raises(ValueError):
        FrfSweep(GRID[::-1], np.ones(GRID.size))


def test_lorentzian_is_even_about_eta_with_half_maximum_at_width():
    offsets = np.linspace(0.0, 300.0, 61)
    above = lorentzian_value(ETA + offsets, ETA, D, A_PEAK, 1e-6)
    below = lorentzian_value(ETA - offsets, ETA, D, A_PEAK, 1e-6)
    np.testing.assert_allclose(above, below, rtol=1e-6)
    half = D / (2 * math.pi)
    for f in (ETA - half, ETA + half):
        assert lorentzian_value(f, ETA, D, A_PEAK, 1e-6) == pytest.approx(0.5 * (A_PEAK - 1e-6), rel=1e-6)
    assert lorentzian_value(ETA, ETA, D, A_PEAK, 1e-6) == pytest.approx(A_PEAK - 1e-6, rel=1e-12)


def test_refitting_the_fitted_curve_is_a_fixed_point():
    xi = 1e-6
    rng = np.random.default_rng(3)
    noisy = lorentzian_value(GRID, ETA, D, A_PEAK, xi) + rng.uniform(-xi / 10, xi / 10, GRID.size)
    fit = fit_lorentzian(FrfSweep(GRID, noisy, noise_floor=xi))
    refit = fit_lorentzian(FrfSweep(GRID, fit.curve(GRID), noise_floor=xi))
    assert refit.eta == pytest.approx(fit.eta, rel=1e-8)
    assert refit.d == pytest.approx(fit.d, rel=1e-7)
    assert refit.a_peak == pytest.approx(fit.a_peak, rel=1e-7)
    assert refit.residual_rms < 1e-3 * fit.residual_rms


def test_scaling_factor_is_linear_in_lab_and_inverse_in_simulation(monkeypatch):
    import common.oscillator.calibration as calibration

    p = ParamVector(1.9, 20.0, 120.0)
    sim = simulate_frf(p, HYBRID, GRID, channel=1)
    lab = FrfSweep(GRID, 2.0 * sim)
    chi = scaling_factor(p, lab, HYBRID, GRID)
    assert scaling_factor(p, FrfSweep(GRID, 5.0 * lab.amplitudes), HYBRID, GRID) == pytest.approx(5.0 * chi, rel=1e-12)

    unscaled = calibration.simulate_frf
    monkeypatch.setattr(calibration, "simulate_frf", lambda *args, **kw: 4.0 * unscaled(*args, **kw))
    assert scaling_factor(p, lab, HYBRID, GRID) == pytest.approx(chi / 4.0, rel=1e-12)


def test_scaling_factor_grows_with_damping():
    lab = FrfSweep(GRID, np.full(GRID.size, 1e-4))
    narrow = scaling_factor(ParamVector(0.0, 20.0, 120.0), lab, HYBRID, GRID)
    wide = scaling_factor(ParamVector(0.0, 40.0, 120.0), lab, HYBRID, GRID)
    assert wide / narrow == pytest.approx(2.0, rel=1e-4)


def test_simulated_frf_peaks_at_eta_plus_and_is_symmetric():
    amplitudes = simulate_frf(ParamVector(0.0, 20.0, 120.0), HYBRID, GRID, channel=1)
    centre = int(np.argmax(amplitudes))
    assert GRID[centre] == pytest.approx(HYBRID.eta_plus, abs=1.25)
    k = min(centre, GRID.size - 1 - centre)
    np.testing.assert_allclose(amplitudes[centre - k : centre], amplitudes[centre + k : centre : -1], rtol=1e-3)
