"""
Synthetic experiment generator with a known ground truth.

Spectra carry one bin per drive tone at χ*·z_p*(u) on top of a seeded uniform
noise floor with mean ξ; the FRF sweep is χ*·|H_p*(f)| plus the same kind of
noise. With ξ = 0 the extracted lab peaks equal the scaled forward amplitudes
exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..oscillator.calibration import FrfSweep, simulate_frf
from ..oscillator.forward import ControlPair, Spectrum, nearest_channel, steady_peak_amplitudes
from ..oscillator.model import Branch, HybridStiffness, ParamVector
from ..shared.errors import SchemaError
from ..shared.utils import lookup_tagged, make_rng
from .experiment import DriftSpec, ExperimentSet
from .scenarios import ETA_PLUS_DRIFT, NOISE_FLOOR_V, TRUTH_D1_HZ, TRUTH_D2_HZ, TRUTH_THETA

_logger = logging.getLogger(__name__)

DEFAULT_FRF_PEAK_V = 100e-6


@dataclass(frozen=True)
class GridSpec:
    """Spectrum grid (margin beyond the outer tones, bin width) and FRF sweep layout, in Hz."""

    margin: float = 500.0
    resolution: float = 1.0
    frf_span: float = 1000.0
    frf_points: int = 401

    def __post_init__(self) -> None:
        if self.resolution <= 0 or self.margin < 0 or self.frf_span <= 0:
            raise ValueError(f"invalid grid spec {self}")
        if self.frf_points < 5:
            raise ValueError(f"FRF sweep needs at least 5 points, got {self.frf_points}")

    @classmethod
    def from_mapping(cls, section: Mapping[str, Any]) -> "GridSpec":
        base = cls()
        margin = lookup_tagged(section, "margin", "frequency")
        resolution = lookup_tagged(section, "resolution", "frequency")
        span = lookup_tagged(section, "frf_span", "frequency")
        return cls(
            margin=base.margin if margin is None else margin,
            resolution=base.resolution if resolution is None else resolution,
            frf_span=base.frf_span if span is None else span,
            frf_points=int(section.get("frf_points", base.frf_points)),
        )

    def to_config(self) -> Dict[str, Any]:
        return {
            "margin_Hz": float(self.margin),
            "resolution_Hz": float(self.resolution),
            "frf_span_Hz": float(self.frf_span),
            "frf_points": int(self.frf_points),
        }


@dataclass(frozen=True)
class SyntheticTruth:
    """
    Ground truth for a synthetic campaign.

    Unless given, Q± are chosen as η±(start)/d so that the damping reference
    η±/Q± of the first pair equals (d1, d2). ``chi`` defaults to the value that
    puts the FRF maximum at 100 µV.
    """

    theta: float = TRUTH_THETA
    d1: float = TRUTH_D1_HZ
    d2: float = TRUTH_D2_HZ
    branch: Branch = Branch.ROTATION
    chi: Optional[float] = None
    noise_floor: float = NOISE_FLOOR_V
    drift: DriftSpec = ETA_PLUS_DRIFT
    q_plus: Optional[float] = None
    q_minus: Optional[float] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not abs(self.theta) <= 2 * math.pi:
            raise ValueError(f"theta must lie within [-2π, 2π], got {self.theta}")
        if not (self.d1 > 0 and self.d2 > 0):
            raise ValueError(f"true dampings must be positive, got {self.d1}, {self.d2}")
        if self.chi is not None and not self.chi > 0:
            raise ValueError(f"chi must be positive, got {self.chi}")
        if self.noise_floor < 0:
            raise ValueError(f"noise floor must be non-negative, got {self.noise_floor}")
        object.__setattr__(self, "branch", Branch(self.branch))

    @property
    def param_vector(self) -> ParamVector:
        return ParamVector(self.theta, self.d1, self.d2, self.branch)

    def quality_factors(self) -> Tuple[float, float]:
        q_plus = self.q_plus if self.q_plus is not None else self.drift.eta_plus_start / self.d1
        q_minus = self.q_minus if self.q_minus is not None else self.drift.eta_minus_start / self.d2
        return q_plus, q_minus

    @classmethod
    def from_mapping(
        cls, section: Mapping[str, Any], drift: DriftSpec, file: Optional[str] = None
    ) -> "SyntheticTruth":
        """Build from a config ``truth`` section; the drift comes from the ``drift`` section."""
        try:
            theta = float(section["theta"])
        except KeyError:
            raise SchemaError("missing key 'theta' in [truth]", file=file, column="theta")
        d1 = lookup_tagged(section, "d1", "frequency")
        d2 = lookup_tagged(section, "d2", "frequency")
        noise = lookup_tagged(section, "noise", "voltage")
        if d1 is None or d2 is None:
            raise SchemaError("[truth] needs d1_<unit> and d2_<unit>", file=file)
        chi = section.get("chi")
        try:
            branch = Branch(section.get("branch", Branch.ROTATION.value))
        except ValueError as exc:
            raise SchemaError(str(exc), file=file, column="branch") from exc
        return cls(
            theta=theta,
            d1=d1,
            d2=d2,
            branch=branch,
            chi=None if chi is None else float(chi),
            noise_floor=NOISE_FLOOR_V if noise is None else noise,
            drift=drift,
            q_plus=None if section.get("Q_plus") is None else float(section["Q_plus"]),
            q_minus=None if section.get("Q_minus") is None else float(section["Q_minus"]),
            seed=int(section.get("seed", 0)),
        )

    def to_config(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "theta": float(self.theta),
            "branch": self.branch.value,
            "d1_Hz": float(self.d1),
            "d2_Hz": float(self.d2),
            "noise_V": float(self.noise_floor),
            "seed": int(self.seed),
        }
        if self.chi is not None:
            out["chi"] = float(self.chi)
        if self.q_plus is not None:
            out["Q_plus"] = float(self.q_plus)
        if self.q_minus is not None:
            out["Q_minus"] = float(self.q_minus)
        return out


def frf_grid(hybrid: HybridStiffness, channel: int, grid_spec: GridSpec) -> np.ndarray:
    """Sweep frequencies centred on the eigenfrequency observed by ``channel``."""
    centre = hybrid.eta_plus if channel == 1 else hybrid.eta_minus
    half = 0.5 * grid_spec.frf_span
    return np.linspace(centre - half, centre + half, grid_spec.frf_points)


def truth_scaling(
    truth: SyntheticTruth, frequencies: np.ndarray, hybrid: HybridStiffness, channel: int
) -> float:
    """χ* of the campaign: configured, or the one placing the FRF maximum at 100 µV."""
    if truth.chi is not None:
        return truth.chi
    clean = simulate_frf(truth.param_vector, hybrid, frequencies, channel)
    return DEFAULT_FRF_PEAK_V / float(np.max(clean))


def spectrum_grid(pair: ControlPair, grid_spec: GridSpec) -> Tuple[np.ndarray, int]:
    """Bin frequencies k·Δf covering both tones plus the margin, and the index k of bin 0."""
    res = grid_spec.resolution
    k0 = max(1, math.floor((pair.u1 - grid_spec.margin) / res))
    k1 = math.ceil((pair.u2 + grid_spec.margin) / res)
    return np.arange(k0, k1 + 1) * res, k0


def truth_peak_amplitudes(truth: SyntheticTruth, data: ExperimentSet) -> np.ndarray:
    """χ*·z_p*(u) for every tone of ``data``, shape ``(n_c, 2)``."""
    chi = truth_scaling(truth, data.frf.frequencies, data.frf_hybrid, data.channel)
    p = truth.param_vector
    return np.array(
        [
            steady_peak_amplitudes(p, hybrid, pair, data.channel)
            for pair, hybrid in zip(data.pairs, data.hybrids)
        ]
    ) * chi


def generate_synthetic(
    truth: SyntheticTruth,
    pairs: Sequence[ControlPair],
    grid_spec: GridSpec = GridSpec(),
    seed: Optional[int] = None,
    channel: Optional[int] = None,
) -> ExperimentSet:
    """Synthetic campaign for ``pairs``; identical inputs and seed give identical output."""
    pairs = tuple(pairs)
    if not pairs:
        raise ValueError("at least one control pair is required")
    rng = make_rng(truth.seed if seed is None else seed)
    hybrids = truth.drift.interpolate(len(pairs))
    if channel is None:
        channel = nearest_channel(hybrids[0], 0.5 * (pairs[0].u1 + pairs[0].u2))
    p = truth.param_vector
    xi = truth.noise_floor

    def noise(size: int) -> np.ndarray:
        if xi == 0:
            return np.zeros(size)
        return rng.uniform(0.0, 2.0 * xi, size)

    sweep_freqs = frf_grid(hybrids[0], channel, grid_spec)
    chi = truth_scaling(truth, sweep_freqs, hybrids[0], channel)
    clean = simulate_frf(p, hybrids[0], sweep_freqs, channel)
    frf = FrfSweep(sweep_freqs, chi * clean + noise(sweep_freqs.size), xi)

    spectra = []
    for pair, hybrid in zip(pairs, hybrids):
        freqs, k0 = spectrum_grid(pair, grid_spec)
        amplitudes = noise(freqs.size)
        z = steady_peak_amplitudes(p, hybrid, pair, channel)
        for u, height in zip(pair.tones, z):
            amplitudes[int(round(u / grid_spec.resolution)) - k0] += chi * height
        spectra.append(Spectrum(freqs, amplitudes))

    q_plus, q_minus = truth.quality_factors()
    _logger.info(
        "generated %d pairs on channel %d: theta*=%.4f d*=(%.3g, %.3g) Hz chi*=%.4g",
        len(pairs),
        channel,
        truth.theta,
        truth.d1,
        truth.d2,
        chi,
    )
    return ExperimentSet(
        pairs=pairs,
        drift=truth.drift,
        q_plus=q_plus,
        q_minus=q_minus,
        spectra=tuple(spectra),
        frf=frf,
        channel=channel,
        noise_floor=xi,
    )


__all__ = [
    "DEFAULT_FRF_PEAK_V",
    "GridSpec",
    "SyntheticTruth",
    "frf_grid",
    "truth_scaling",
    "spectrum_grid",
    "truth_peak_amplitudes",
    "generate_synthetic",
]
