"""
Noise-floor subtraction and peak read-off.
"""
import numpy as np
import pytest

from common.experiment.spectra import (
    estimate_noise_floor,
    extract_peak,
    lab_peak_amplitudes,
    subtract_noise,
)
from common.oscillator.forward import ControlPair, Spectrum
from common.shared.errors import EmptyWindow

FREQS = np.arange(100.0, 201.0)


def _spectrum(peaks, floor=0.0):
    amps = np.full(FREQS.size, floor)
    for f, height in peaks.items():
        amps[int(f - FREQS[0])] += height
    return Spectrum(FREQS, amps)


def test_subtract_noise_removes_mean_and_clips():
    spectrum = Spectrum(np.array([1.0, 2.0, 3.0, 4.0]), np.array([1.0, 1.0, 1.0, 5.0]))
    cleaned, xi = subtract_noise(spectrum)
    assert xi == 2.0
    np.testing.assert_allclose(cleaned.amplitudes, [0.0, 0.0, 0.0, 3.0])


def test_subtract_noise_of_empty_spectrum_raises():
    with pytest.raises(EmptyWindow):
        subtract_noise(Spectrum(np.zeros(0), np.zeros(0)))


def test_estimate_noise_floor_averages_spectra():
    a = Spectrum(FREQS, np.full(FREQS.size, 1.0))
    b = Spectrum(FREQS, np.full(FREQS.size, 3.0))
    assert estimate_noise_floor([a, b]) == pytest.approx(2.0)


def test_extract_peak_uses_inclusive_window():
    spectrum = _spectrum({150.0: 2.0, 156.0: 5.0})
    # default window is five bins either side
    assert extract_peak(spectrum, 150.0) == 2.0
    assert extract_peak(spectrum, 151.0) == 5.0
    assert extract_peak(spectrum, 150.0, half_window=6.0) == 5.0


def test_extract_peak_outside_grid_raises():
    with pytest.raises(EmptyWindow):
        extract_peak(_spectrum({150.0: 1.0}), 500.0, half_window=2.0)


def test_lab_peaks_with_configured_floor():
    floor = 0.25
    spectra = [_spectrum({120.0: 3.0, 180.0: 1.5}, floor), _spectrum({130.0: 2.0, 170.0: 4.0}, floor)]
    pairs = [ControlPair(120.0, 180.0), ControlPair(130.0, 170.0)]
    peaks = lab_peak_amplitudes(spectra, pairs, noise_floor=floor)
    np.testing.assert_allclose(peaks, [[3.0, 1.5], [2.0, 4.0]])


def test_lab_peaks_estimate_floor_per_spectrum_when_unset():
    spectra = [_spectrum({120.0: 10.0, 180.0: 10.0}, 1.0)]
    peaks = lab_peak_amplitudes(spectra, [ControlPair(120.0, 180.0)])
    mean = 1.0 + 20.0 / FREQS.size
    np.testing.assert_allclose(peaks, [[11.0 - mean, 11.0 - mean]])


def test_lab_peaks_need_one_spectrum_per_pair():
    with pytest.raises(ValueError):
        lab_peak_amplitudes([_spectrum({})], [ControlPair(120.0, 180.0), ControlPair(130.0, 170.0)])
