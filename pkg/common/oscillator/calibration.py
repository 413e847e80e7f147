"""
FRF calibration: Lorentzian resonance model, least-squares fitting of swept
frequency-response data, and the parameter-dependent simulation-to-lab
scaling factor.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from ..shared.errors import CalibrationError, FitDiverged, NoPeak, ZeroMaximum
from .forward import phasor_response
from .model import TWO_PI, HybridStiffness, ParamVector

_logger = logging.getLogger(__name__)

MIN_SWEEP_POINTS = 5
PEAK_TO_NOISE = 3.0
FIT_XTOL = 1e-10
FIT_MAX_ITERATIONS = 200


@dataclass(frozen=True)
class FrfSweep:
    """Single-tone sweep across one resonance: amplitudes in V, noise floor ξ in V."""

    frequencies: np.ndarray
    amplitudes: np.ndarray
    noise_floor: float = 0.0

    def __post_init__(self) -> None:
        freqs = np.asarray(self.frequencies, dtype=float)
        amps = np.asarray(self.amplitudes, dtype=float)
        if freqs.ndim != 1 or freqs.shape != amps.shape:
            raise ValueError(
                f"frequencies and amplitudes must be 1-D of equal length, "
                f"got {freqs.shape} and {amps.shape}"
            )
        if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
            raise ValueError("sweep frequencies must be strictly increasing")
        if np.any(amps < 0):
            raise ValueError("sweep amplitudes must be non-negative")
        if self.noise_floor < 0:
            raise ValueError(f"noise floor must be non-negative, got {self.noise_floor}")
        freqs.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "noise_floor", float(self.noise_floor))

    def __len__(self) -> int:
        return int(self.frequencies.size)

    @property
    def peak_frequency(self) -> float:
        return float(self.frequencies[int(np.argmax(self.amplitudes))])

    def above_floor(self) -> "FrfSweep":
        """The sweep with ξ subtracted and clipped at zero, as the drive spectra are read."""
        if self.noise_floor == 0:
            return self
        return FrfSweep(self.frequencies, np.clip(self.amplitudes - self.noise_floor, 0.0, None))


@dataclass(frozen=True)
class LorentzianFit:
    """
    Fitted resonance. ``d`` is the width parameter of the Lorentzian in rad/s,
    so the curve's full width at half maximum is ``d/π`` Hz. With ``squared``
    set, ``a_peak`` and ``residual_rms`` are in V².
    """

    eta: float
    d: float
    a_peak: float
    residual_rms: float
    noise_floor: float = 0.0
    squared: bool = False
    iterations: int = 0

    @property
    def linewidth_hz(self) -> float:
        return self.d / math.pi

    @property
    def quality(self) -> float:
        return self.eta / self.linewidth_hz

    @property
    def peak_amplitude(self) -> float:
        """Peak height in V regardless of the fitted target."""
        return math.sqrt(self.a_peak) if self.squared else self.a_peak

    def curve(self, frequencies: Sequence[float] | np.ndarray) -> np.ndarray:
        xi = self.noise_floor**2 if self.squared else self.noise_floor
        return lorentzian_value(np.asarray(frequencies, dtype=float), self.eta, self.d, self.a_peak, xi)

    def to_dict(self) -> dict:
        return {
            "eta_Hz": self.eta,
            "d": self.d,
            "linewidth_Hz": self.linewidth_hz,
            "Q": self.quality,
            "A_peak_V": self.peak_amplitude,
            "residual_rms": self.residual_rms,
            "target": "squared" if self.squared else "amplitude",
            "iterations": self.iterations,
        }


def lorentzian_value(
    f: float | np.ndarray, eta: float, d: float, a_peak: float, xi: float
) -> float | np.ndarray:
    """(A_peak − ξ) / (1 + ((2πf − 2πη)/d)²)."""
    if d <= 0:
        raise ValueError(f"Lorentzian width must be positive, got {d}")
    u = (TWO_PI * (np.asarray(f, dtype=float) - eta)) / d
    value = (a_peak - xi) / (1.0 + u * u)
    return float(value) if np.ndim(value) == 0 else value


def _half_maximum_width(freqs: np.ndarray, values: np.ndarray, k: int) -> float:
    """Full width at half of ``values[k]`` by walking outwards from the peak."""
    half = 0.5 * values[k]
    left = k
    while left > 0 and values[left] > half:
        left -= 1
    right = k
    while right < values.size - 1 and values[right] > half:
        right += 1
    width = float(freqs[right] - freqs[left])
    spacing = float(np.min(np.diff(freqs)))
    return max(width, spacing)


def fit_lorentzian(
    sweep: FrfSweep,
    squared: bool = False,
    max_iterations: int = FIT_MAX_ITERATIONS,
) -> LorentzianFit:
    """
    Levenberg–Marquardt fit of (η, d, A_peak) against :func:`lorentzian_value`
    with the sweep's ξ held fixed.

    The start point is the argmax frequency, the grid half-maximum width and the
    maximum amplitude. ``squared`` fits |FRF|² against the same shape with ξ².
    """
    if len(sweep) < MIN_SWEEP_POINTS:
        raise CalibrationError(
            f"sweep has {len(sweep)} points, at least {MIN_SWEEP_POINTS} are required"
        )
    freqs = sweep.frequencies
    peak = float(np.max(sweep.amplitudes))
    if peak <= 0 or peak <= PEAK_TO_NOISE * sweep.noise_floor:
        raise NoPeak(
            f"sweep maximum {peak:.3e} V does not exceed "
            f"{PEAK_TO_NOISE:g}·ξ = {PEAK_TO_NOISE * sweep.noise_floor:.3e} V"
        )

    values = sweep.amplitudes**2 if squared else np.array(sweep.amplitudes)
    xi = sweep.noise_floor**2 if squared else sweep.noise_floor
    k = int(np.argmax(values))
    eta0 = float(freqs[k])
    width0 = _half_maximum_width(freqs, values, k)
    d0 = math.pi * width0
    a0 = float(values[k]) + xi

    def unpack(x: np.ndarray) -> tuple[float, float, float]:
        return eta0 + x[0] * width0, x[1] * d0, x[2] * a0

    def residuals(x: np.ndarray) -> np.ndarray:
        eta, d, a_peak = unpack(x)
        u = TWO_PI * (freqs - eta) / d
        return ((a_peak - xi) / (1.0 + u * u) - values) / a0

    def jacobian(x: np.ndarray) -> np.ndarray:
        eta, d, a_peak = unpack(x)
        u = TWO_PI * (freqs - eta) / d
        denom = 1.0 + u * u
        height = a_peak - xi
        d_eta = height * 2.0 * u * (TWO_PI / d) / denom**2
        d_d = height * 2.0 * u * u / (d * denom**2)
        d_a = 1.0 / denom
        return np.column_stack([d_eta * width0, d_d * d0, d_a * a0]) / a0

    x0 = np.array([0.0, 1.0, 1.0])
    initial_cost = 0.5 * float(np.sum(residuals(x0) ** 2))
    result = least_squares(
        residuals,
        x0,
        jac=jacobian,
        method="lm",
        xtol=FIT_XTOL,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=max_iterations,
    )
    if result.status == 0:
        _logger.warning(
            "Lorentzian fit stopped at the iteration cap (%d evaluations)", result.nfev
        )
    if not np.all(np.isfinite(result.x)) or result.cost > initial_cost:
        raise FitDiverged(
            f"fit residual cost {result.cost:.3e} exceeds the starting cost {initial_cost:.3e}"
        )

    eta, d, a_peak = unpack(result.x)
    d = abs(d)
    if d == 0 or a_peak <= xi:
        raise FitDiverged(f"fit ended at a degenerate curve (d={d}, A_peak={a_peak})")
    rms = math.sqrt(2.0 * result.cost / freqs.size) * a0
    _logger.debug(
        "Lorentzian fit: eta=%.6f Hz d=%.4g A=%.4g after %d evaluations",
        eta,
        d,
        a_peak,
        result.nfev,
    )
    return LorentzianFit(
        eta=eta,
        d=d,
        a_peak=a_peak,
        residual_rms=rms,
        noise_floor=sweep.noise_floor,
        squared=squared,
        iterations=int(result.nfev),
    )


def simulate_frf(
    p: ParamVector,
    hybrid: HybridStiffness,
    grid: Sequence[float] | np.ndarray,
    channel: int = 1,
) -> np.ndarray:
    """Steady-state amplitude of ``channel`` under a unit single-tone drive at each grid point."""
    if channel not in (1, 2):
        raise ValueError(f"channel must be 1 or 2, got {channel!r}")
    freqs = np.asarray(grid, dtype=float)
    if freqs.size == 0:
        raise ValueError("FRF grid is empty")
    return np.abs(phasor_response(p, hybrid, freqs, 1.0)[:, channel - 1])


def scaling_factor(
    p: ParamVector,
    lab: FrfSweep,
    hybrid: HybridStiffness,
    sim_grid: Sequence[float] | np.ndarray,
    channel: int = 1,
) -> float:
    """χ_p = max(lab FRF) / max(simulated FRF at p)."""
    lab_max = float(np.max(lab.amplitudes)) if len(lab) else 0.0
    if not lab_max > 0:
        raise ZeroMaximum("lab FRF sweep has no positive maximum")
    sim_max = float(np.max(simulate_frf(p, hybrid, sim_grid, channel)))
    if not (sim_max > 0 and math.isfinite(sim_max)):
        raise ZeroMaximum(f"simulated FRF maximum is {sim_max!r}")
    return lab_max / sim_max


__all__ = [
    "FrfSweep",
    "LorentzianFit",
    "lorentzian_value",
    "fit_lorentzian",
    "simulate_frf",
    "scaling_factor",
]
