"""
Experiment container: control pairs, drifted hybrid stiffness per pair, lab
spectra with their extracted peak amplitudes, and the FRF sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..oscillator.calibration import FrfSweep
from ..oscillator.forward import ControlPair, Spectrum
from ..oscillator.model import HybridStiffness, damping_reference
from .spectra import DEFAULT_HALF_WINDOW_BINS, estimate_noise_floor, lab_peak_amplitudes


def drift_interpolate(
    eta_start: Tuple[float, float], eta_end: Tuple[float, float], n_c: int
) -> List[HybridStiffness]:
    """
    Linear drift of (η+, η−) across ``n_c`` control pairs; the first entry is
    ``eta_start`` and the last ``eta_end``.
    """
    if n_c < 1:
        raise ValueError(f"n_c must be >= 1, got {n_c}")
    if n_c == 1:
        return [HybridStiffness(*eta_start)]
    out = []
    for m in range(n_c):
        t = m / (n_c - 1)
        plus = (1.0 - t) * eta_start[0] + t * eta_end[0]
        minus = (1.0 - t) * eta_start[1] + t * eta_end[1]
        out.append(HybridStiffness(plus, minus))
    return out


@dataclass(frozen=True)
class DriftSpec:
    """Eigenfrequencies measured before (start) and after (end) the drive sequence, in Hz."""

    eta_plus_start: float
    eta_plus_end: float
    eta_minus_start: float
    eta_minus_end: float

    def __post_init__(self) -> None:
        # HybridStiffness enforces 0 < η+ <= η− at both ends
        HybridStiffness(self.eta_plus_start, self.eta_minus_start)
        HybridStiffness(self.eta_plus_end, self.eta_minus_end)

    @classmethod
    def constant(cls, hybrid: HybridStiffness) -> "DriftSpec":
        return cls(hybrid.eta_plus, hybrid.eta_plus, hybrid.eta_minus, hybrid.eta_minus)

    @property
    def start(self) -> HybridStiffness:
        return HybridStiffness(self.eta_plus_start, self.eta_minus_start)

    @property
    def end(self) -> HybridStiffness:
        return HybridStiffness(self.eta_plus_end, self.eta_minus_end)

    def interpolate(self, n_c: int) -> List[HybridStiffness]:
        return drift_interpolate(
            (self.eta_plus_start, self.eta_minus_start),
            (self.eta_plus_end, self.eta_minus_end),
            n_c,
        )


@dataclass(frozen=True, eq=False)
class ExperimentSet:
    """
    One drive campaign around a single resonance.

    ``noise_floor`` is the configured ξ; when it is ``None`` the floor is the
    average of the spectra (see :func:`estimate_noise_floor`). ``hybrids`` and
    ``lab_peaks`` are derived on construction.
    """

    pairs: Tuple[ControlPair, ...]
    drift: DriftSpec
    q_plus: float
    q_minus: float
    spectra: Tuple[Spectrum, ...]
    frf: FrfSweep
    channel: int = 1
    noise_floor: Optional[float] = None
    half_window_bins: int = DEFAULT_HALF_WINDOW_BINS
    hybrids: Tuple[HybridStiffness, ...] = field(init=False)
    lab_peaks: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        pairs = tuple(self.pairs)
        spectra = tuple(self.spectra)
        if not pairs:
            raise ValueError("an experiment needs at least one control pair")
        if len(spectra) != len(pairs):
            raise ValueError(f"{len(pairs)} control pairs but {len(spectra)} spectra")
        if len({pair.amplitude for pair in pairs}) != 1:
            raise ValueError("all control pairs must share one drive amplitude")
        if self.channel not in (1, 2):
            raise ValueError(f"channel must be 1 or 2, got {self.channel!r}")
        if self.noise_floor is not None and self.noise_floor < 0:
            raise ValueError(f"noise floor must be non-negative, got {self.noise_floor}")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "spectra", spectra)
        object.__setattr__(self, "hybrids", tuple(self.drift.interpolate(len(pairs))))
        peaks = lab_peak_amplitudes(spectra, pairs, self.noise_floor, self.half_window_bins)
        peaks.setflags(write=False)
        object.__setattr__(self, "lab_peaks", peaks)

    @property
    def n_c(self) -> int:
        return len(self.pairs)

    @property
    def amplitude(self) -> float:
        return self.pairs[0].amplitude

    @property
    def xi(self) -> float:
        """Noise floor ξ in effect: configured, else estimated from the spectra."""
        if self.noise_floor is not None:
            return self.noise_floor
        return estimate_noise_floor(self.spectra)

    @property
    def frf_hybrid(self) -> HybridStiffness:
        """The FRF sweep is taken before the drive sequence, at the drift start."""
        return self.drift.start

    def damping_reference(self) -> Tuple[float, float]:
        """(η+/Q+, η−/Q−) at the drift start, in Hz."""
        first = self.drift.start
        return damping_reference(first.eta_plus, first.eta_minus, self.q_plus, self.q_minus)

    def reordered(self, order: Sequence[int]) -> "ExperimentSet":
        """Same data with pairs (and their spectra and drift slots) permuted."""
        hybrids = [self.hybrids[i] for i in order]
        data = ExperimentSet(
            pairs=tuple(self.pairs[i] for i in order),
            drift=self.drift,
            q_plus=self.q_plus,
            q_minus=self.q_minus,
            spectra=tuple(self.spectra[i] for i in order),
            frf=self.frf,
            channel=self.channel,
            noise_floor=self.noise_floor,
            half_window_bins=self.half_window_bins,
        )
        object.__setattr__(data, "hybrids", tuple(hybrids))
        return data


__all__ = ["drift_interpolate", "DriftSpec", "ExperimentSet"]
