"""
Time-domain simulator used as an independent oracle for the closed-form path.

Fixed-step classic Runge–Kutta integration of the 4-dimensional first-order
system from rest, followed by a one-sided DFT of the post-transient window.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..shared.errors import EmptyWindow, StepTooLarge
from .forward import ControlPair, Spectrum, drive_value, system_matrices
from .model import HybridStiffness, ParamVector

_logger = logging.getLogger(__name__)

STEPS_PER_PERIOD = 20
SETTLE_DECAYS = 10.0


@dataclass(frozen=True)
class TimeWindow:
    """Integrate on [0, t_total] with step dt; sample on [t_trans, t_total)."""

    t_trans: float
    t_total: float
    dt: float

    def __post_init__(self) -> None:
        if not (0 < self.t_trans < self.t_total):
            raise ValueError(
                f"expected 0 < t_trans < t_total, got {self.t_trans}, {self.t_total}"
            )
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        count = (self.t_total - self.t_trans) / self.dt
        if abs(count - round(count)) > 1e-6 * max(1.0, count) or round(count) < 1:
            raise ValueError(
                f"(t_total - t_trans)/dt = {count} is not a positive integer count"
            )

    @property
    def n_samples(self) -> int:
        return int(round((self.t_total - self.t_trans) / self.dt))

    @property
    def n_transient(self) -> int:
        return int(round(self.t_trans / self.dt))

    @property
    def resolution(self) -> float:
        return 1.0 / (self.n_samples * self.dt)


@dataclass(frozen=True)
class Trajectory:
    """Sampled hybridized coordinates 𝒯_p q(t); ``values[:, k]`` is channel k+1."""

    times: np.ndarray
    values: np.ndarray

    def channel(self, channel: int) -> np.ndarray:
        if channel not in (1, 2):
            raise ValueError(f"channel must be 1 or 2, got {channel!r}")
        return self.values[:, channel - 1]


def max_step(hybrid: HybridStiffness, pair: ControlPair) -> float:
    """Largest admissible integrator step for this system and drive."""
    return 1.0 / (STEPS_PER_PERIOD * max(hybrid.eta_minus, pair.u2))


def simulate_time_domain(
    p: ParamVector,
    hybrid: HybridStiffness,
    pair: ControlPair,
    window: TimeWindow,
) -> Trajectory:
    """Integrate from q(0) = q̇(0) = 0 and return 𝒯_p q(t) sampled on the window."""
    limit = max_step(hybrid, pair)
    if window.dt > limit * (1 + 1e-12):
        raise StepTooLarge(f"dt={window.dt} exceeds 1/(20·max(η−, u2)) = {limit}")

    T, D, C = system_matrices(p, hybrid)
    A = np.zeros((4, 4))
    A[:2, 2:] = np.eye(2)
    A[2:, :2] = -C
    A[2:, 2:] = -D
    g = np.zeros(4)
    g[2:] = T.T @ np.ones(2)

    dt = window.dt
    n_trans = window.n_transient
    n_total = n_trans + window.n_samples
    y = np.zeros(4)
    samples = np.empty((window.n_samples, 2))
    _logger.debug("RK4: %d steps of %.3e s (%d transient)", n_total, dt, n_trans)

    half = 0.5 * dt
    for step in range(n_total):
        if step >= n_trans:
            samples[step - n_trans] = T @ y[:2]
        t = step * dt
        s0 = drive_value(pair, t)
        s_half = drive_value(pair, t + half)
        s1 = drive_value(pair, t + dt)
        k1 = A @ y + g * s0
        k2 = A @ (y + half * k1) + g * s_half
        k3 = A @ (y + half * k2) + g * s_half
        k4 = A @ (y + dt * k3) + g * s1
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    times = (n_trans + np.arange(window.n_samples)) * dt
    return Trajectory(times=times, values=samples)


def spectrum_of_window(
    trajectory: Trajectory, window: TimeWindow, channel: int = 1
) -> Spectrum:
    """
    One-sided amplitude spectrum of one channel on [0, 1/(2dt)] with resolution
    1/(t_total − t_trans).

    Bins are scaled so that an on-grid cosine of amplitude a reads a; the DC and
    Nyquist bins are scaled by 1/N so the one-sided Parseval identity holds.
    """
    signal = trajectory.channel(channel)
    n = signal.size
    if n == 0:
        raise EmptyWindow("trajectory holds no samples")
    amplitudes = np.abs(np.fft.rfft(signal)) * (2.0 / n)
    amplitudes[0] *= 0.5
    if n % 2 == 0:
        amplitudes[-1] *= 0.5
    frequencies = np.fft.rfftfreq(n, d=window.dt)
    return Spectrum(frequencies=frequencies, amplitudes=amplitudes)


def desk_window(
    p: ParamVector,
    hybrid: HybridStiffness,
    pair: ControlPair,
    resolution_hz: float,
    *,
    d_floor: float = 1e-6,
    oversample: int = 2,
) -> TimeWindow:
    """
    A window meeting the oracle preconditions: dt resolves the fastest frequency
    ``oversample`` times finer than required, the sampled span is 1/resolution
    (so grid-aligned tones land on bins) and the transient lasts at least
    10/min(d1, d2) seconds.
    """
    if oversample < 1:
        raise ValueError(f"oversample must be >= 1, got {oversample}")
    span = 1.0 / resolution_hz
    n = math.ceil(span * oversample / max_step(hybrid, pair))
    dt = span / n
    slowest = max(min(p.d1, p.d2), d_floor)
    n_trans = max(1, math.ceil(SETTLE_DECAYS / slowest / dt))
    t_trans = n_trans * dt
    return TimeWindow(t_trans=t_trans, t_total=t_trans + n * dt, dt=dt)


__all__ = [
    "TimeWindow",
    "Trajectory",
    "max_step",
    "simulate_time_domain",
    "spectrum_of_window",
    "desk_window",
]
