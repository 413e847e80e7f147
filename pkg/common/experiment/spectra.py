"""
Spectrum post-processing: noise-floor subtraction and peak read-off at the
drive frequencies.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from ..oscillator.forward import ControlPair, Spectrum
from ..shared.errors import EmptyWindow

_logger = logging.getLogger(__name__)

DEFAULT_HALF_WINDOW_BINS = 5


def subtract_noise(spectrum: Spectrum) -> Tuple[Spectrum, float]:
    """Remove the mean amplitude ξ and clip at zero; returns the new spectrum and ξ."""
    if len(spectrum) == 0:
        raise EmptyWindow("cannot estimate the noise floor of an empty spectrum")
    xi = float(np.mean(spectrum.amplitudes))
    return _subtract_constant(spectrum, xi), xi


def _subtract_constant(spectrum: Spectrum, xi: float) -> Spectrum:
    cleaned = np.maximum(spectrum.amplitudes - xi, 0.0)
    return Spectrum(frequencies=spectrum.frequencies, amplitudes=cleaned)


def estimate_noise_floor(spectra: Sequence[Spectrum]) -> float:
    """Average of the per-spectrum mean amplitudes."""
    if not spectra:
        raise EmptyWindow("no spectra to estimate a noise floor from")
    return float(np.mean([np.mean(s.amplitudes) for s in spectra]))


def extract_peak(
    spectrum: Spectrum, u: float, half_window: Optional[float] = None
) -> float:
    """
    Largest amplitude within ``[u − half_window, u + half_window]``.

    The default half window is five grid bins.
    """
    if half_window is None:
        half_window = DEFAULT_HALF_WINDOW_BINS * spectrum.resolution
    freqs = spectrum.frequencies
    # edges are inclusive
    slack = 1e-9 * max(half_window, 1.0)
    mask = np.abs(freqs - u) <= half_window + slack
    if not np.any(mask):
        raise EmptyWindow(f"no spectrum bins within {half_window} Hz of {u} Hz")
    return float(np.max(spectrum.amplitudes[mask]))


def lab_peak_amplitudes(
    spectra: Sequence[Spectrum],
    pairs: Sequence[ControlPair],
    noise_floor: Optional[float] = None,
    half_window_bins: int = DEFAULT_HALF_WINDOW_BINS,
) -> np.ndarray:
    """
    Peak heights z* at (u1, u2) for every pair, shape ``(n_c, 2)``.

    A configured ``noise_floor`` is subtracted as a constant; otherwise each
    spectrum's own mean is removed first.
    """
    if len(spectra) != len(pairs):
        raise ValueError(f"{len(pairs)} control pairs but {len(spectra)} spectra")
    peaks = np.empty((len(pairs), 2))
    for m, (spectrum, pair) in enumerate(zip(spectra, pairs)):
        if noise_floor is None:
            cleaned, xi = subtract_noise(spectrum)
            _logger.debug("pair %d: estimated noise floor %.3e V", m + 1, xi)
        else:
            cleaned = _subtract_constant(spectrum, noise_floor)
        half_window = half_window_bins * cleaned.resolution
        peaks[m, 0] = extract_peak(cleaned, pair.u1, half_window)
        peaks[m, 1] = extract_peak(cleaned, pair.u2, half_window)
    return peaks


__all__ = [
    "DEFAULT_HALF_WINDOW_BINS",
    "subtract_noise",
    "estimate_noise_floor",
    "extract_peak",
    "lab_peak_amplitudes",
]
