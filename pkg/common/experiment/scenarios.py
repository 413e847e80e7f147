"""
Bundled drive campaigns and reference values.

Drive frequencies are stored in Hz. The eta-plus campaign brackets the lower
hybrid resonance (observed on channel 1), the eta-minus campaign the upper one
(channel 2). Each campaign narrows its tone spacing from 200 Hz to 20 Hz.
"""

from __future__ import annotations

from typing import Sequence, Tuple

from ..oscillator.forward import ControlPair
from ..oscillator.model import HybridStiffness, PhysicalParams
from .experiment import DriftSpec

ETA_PLUS_DRIVES_HZ: Tuple[Tuple[float, float], ...] = (
    (6_940_160.0, 6_940_360.0),
    (6_940_180.0, 6_940_340.0),
    (6_940_200.0, 6_940_320.0),
    (6_940_240.0, 6_940_280.0),
    (6_940_250.0, 6_940_270.0),
)

ETA_MINUS_DRIVES_HZ: Tuple[Tuple[float, float], ...] = (
    (7_027_500.0, 7_027_700.0),
    (7_027_520.0, 7_027_680.0),
    (7_027_540.0, 7_027_660.0),
    (7_027_580.0, 7_027_620.0),
    (7_027_590.0, 7_027_610.0),
)

# physical coefficients of the lab resonator, in Hz
REFERENCE_COEFFICIENTS = PhysicalParams(f1=6.9522e6, f2=7.0156e6, coupling=0.6474e6)

TRUTH_THETA = 1.9498
TRUTH_D1_HZ = 20.0
TRUTH_D2_HZ = 120.0

# eigenfrequency drift of 400 Hz across the campaign, centred on each drive band
ETA_PLUS_DRIFT = DriftSpec(
    eta_plus_start=6_940_060.0,
    eta_plus_end=6_940_460.0,
    eta_minus_start=7_027_400.0,
    eta_minus_end=7_027_800.0,
)

NOISE_FLOOR_V = 0.25e-6

# desk scale: single-digit Hz so the RK4 oracle runs in seconds
DESK_HYBRID = HybridStiffness(eta_plus=6.0, eta_minus=8.0)
DESK_DRIVES_HZ: Tuple[Tuple[float, float], ...] = (
    (5.0, 7.0),
    (5.2, 6.8),
    (5.5, 6.5),
    (5.7, 6.3),
)
DESK_RESOLUTION_HZ = 0.1


def drive_pairs(
    table: Sequence[Tuple[float, float]], amplitude: float = 1.0
) -> Tuple[ControlPair, ...]:
    return tuple(ControlPair(u1, u2, amplitude) for u1, u2 in table)


def eta_plus_pairs(amplitude: float = 1.0) -> Tuple[ControlPair, ...]:
    return drive_pairs(ETA_PLUS_DRIVES_HZ, amplitude)


def eta_minus_pairs(amplitude: float = 1.0) -> Tuple[ControlPair, ...]:
    return drive_pairs(ETA_MINUS_DRIVES_HZ, amplitude)


def desk_pairs(amplitude: float = 1.0) -> Tuple[ControlPair, ...]:
    return drive_pairs(DESK_DRIVES_HZ, amplitude)


__all__ = [
    "ETA_PLUS_DRIVES_HZ",
    "ETA_MINUS_DRIVES_HZ",
    "REFERENCE_COEFFICIENTS",
    "TRUTH_THETA",
    "TRUTH_D1_HZ",
    "TRUTH_D2_HZ",
    "ETA_PLUS_DRIFT",
    "NOISE_FLOOR_V",
    "DESK_HYBRID",
    "DESK_DRIVES_HZ",
    "DESK_RESOLUTION_HZ",
    "drive_pairs",
    "eta_plus_pairs",
    "eta_minus_pairs",
    "desk_pairs",
]
