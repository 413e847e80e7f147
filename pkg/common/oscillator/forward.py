"""
Closed-form steady-state response of the coupled system to harmonic drives.

In physical coordinates the system is q̈ + 𝒟_p q̇ + 𝒞_p q = 𝒯_pᵀ b̃(t) with
b̃(t) = (b(t), b(t)). For a tone A·cos(2πu t) the steady state is
Re(q̂ e^{iωt}) where (−ω²I + iω𝒟_p + 𝒞_p) q̂ = A·𝒯_pᵀ(1, 1)ᵀ, and the observed
hybridized coordinates are 𝒯_p q̂.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..shared.errors import SingularAtDrive
from .matrix import determinant_scale, solve_2x2
from .model import (
    TWO_PI,
    HybridStiffness,
    ParamVector,
    physical_stiffness_from_hybrid,
    rotation_from_theta,
)

SINGULAR_RTOL = 1e-300


@dataclass(frozen=True)
class ControlPair:
    """Two-tone drive A·cos(2πu1 t) + A·cos(2πu2 t)."""

    u1: float
    u2: float
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if not (self.u1 > 0 and self.u2 > 0):
            raise ValueError(f"drive frequencies must be positive, got {self.u1}, {self.u2}")
        if self.u1 > self.u2:
            raise ValueError(f"expected u1 <= u2, got {self.u1} > {self.u2}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be non-negative, got {self.amplitude}")

    @property
    def tones(self) -> Tuple[float, float]:
        return (self.u1, self.u2)


@dataclass(frozen=True)
class Spectrum:
    """One-sided amplitude spectrum on a strictly increasing frequency grid."""

    frequencies: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        freqs = np.asarray(self.frequencies, dtype=float)
        amps = np.asarray(self.amplitudes, dtype=float)
        if freqs.ndim != 1 or freqs.shape != amps.shape:
            raise ValueError(
                f"frequencies and amplitudes must be 1-D of equal length, "
                f"got {freqs.shape} and {amps.shape}"
            )
        if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
            raise ValueError("frequencies must be strictly increasing")
        freqs.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "amplitudes", amps)

    def __len__(self) -> int:
        return int(self.frequencies.size)

    @property
    def resolution(self) -> float:
        if self.frequencies.size < 2:
            return 0.0
        return float(np.median(np.diff(self.frequencies)))


def drive_value(pair: ControlPair, t: float | np.ndarray) -> float | np.ndarray:
    """A·cos(2πu1 t) + A·cos(2πu2 t)."""
    return pair.amplitude * (np.cos(TWO_PI * pair.u1 * t) + np.cos(TWO_PI * pair.u2 * t))


def beating_envelope(pair: ControlPair) -> Tuple[float, float]:
    """
    Envelope frequency (u2 − u1)/2 and envelope period 1/(u2 − u1) of the two-tone drive.

    The period is ``inf`` for a duplicated tone.
    """
    spacing = pair.u2 - pair.u1
    period = math.inf if spacing == 0 else 1.0 / spacing
    return 0.5 * spacing, period


def system_matrices(
    p: ParamVector, hybrid: HybridStiffness
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(𝒯_p, 𝒟_p, 𝒞_p) for a parameter vector and a hybrid stiffness."""
    T = rotation_from_theta(p.theta, p.branch)
    D = np.diag([TWO_PI * p.d1, TWO_PI * p.d2])
    C = physical_stiffness_from_hybrid(T, hybrid)
    return T, D, C


def phasor_response(
    p: ParamVector,
    hybrid: HybridStiffness,
    frequencies: Sequence[float] | np.ndarray,
    amplitude: float = 1.0,
) -> np.ndarray:
    """
    Hybridized steady-state phasors for single-tone drives at each frequency.

    Returns a complex array of shape ``(n, 2)``; column ``k`` is channel ``k+1``.
    Raises ``SingularAtDrive`` for the first frequency at which the dynamic
    stiffness matrix is singular.
    """
    freqs = np.atleast_1d(np.asarray(frequencies, dtype=float))
    T, D, C = system_matrices(p, hybrid)
    omega = TWO_PI * freqs
    M = (
        -(omega**2)[:, None, None] * np.eye(2)
        + 1j * omega[:, None, None] * D
        + C
    )
    forcing = amplitude * (T.T @ np.ones(2))
    rhs = np.broadcast_to(forcing.astype(complex), (freqs.size, 2))
    q_hat, det = solve_2x2(M, rhs)

    singular = np.abs(det) <= SINGULAR_RTOL * determinant_scale(M)
    singular |= ~np.isfinite(det)
    if amplitude != 0 and np.any(singular):
        k = int(np.argmax(singular))
        raise SingularAtDrive(float(freqs[k]), complex(det[k]))
    if amplitude == 0:
        return np.zeros((freqs.size, 2), dtype=complex)
    return q_hat @ T.T


def frequency_response(
    p: ParamVector,
    hybrid: HybridStiffness,
    u: float,
    amplitude: float = 1.0,
    channel: int = 1,
) -> complex:
    """Steady-state phasor of hybridized channel ``channel`` at drive frequency ``u``."""
    _check_channel(channel)
    return complex(phasor_response(p, hybrid, [u], amplitude)[0, channel - 1])


def steady_peak_amplitudes(
    p: ParamVector, hybrid: HybridStiffness, pair: ControlPair, channel: int = 1
) -> Tuple[float, float]:
    """Magnitudes of the responses at u1 and u2 (simulated peak heights before χ_p)."""
    _check_channel(channel)
    phasors = phasor_response(p, hybrid, pair.tones, pair.amplitude)
    z = np.abs(phasors[:, channel - 1])
    return float(z[0]), float(z[1])


def nearest_channel(hybrid: HybridStiffness, frequency: float) -> int:
    """Channel of the eigenfrequency nearer to ``frequency`` (1 for η+, 2 for η−)."""
    if abs(frequency - hybrid.eta_plus) <= abs(frequency - hybrid.eta_minus):
        return 1
    return 2


def _check_channel(channel: int) -> None:
    if channel not in (1, 2):
        raise ValueError(f"channel must be 1 or 2, got {channel!r}")


__all__ = [
    "ControlPair",
    "Spectrum",
    "drive_value",
    "beating_envelope",
    "system_matrices",
    "phasor_response",
    "frequency_response",
    "steady_peak_amplitudes",
    "nearest_channel",
]
