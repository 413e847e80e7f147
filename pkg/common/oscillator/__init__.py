# File: common/oscillator/__init__.py
"""
Two-mode coupled oscillator: model algebra, forward response, time-domain
oracle and FRF calibration.
"""

from .calibration import (
    FrfSweep,
    LorentzianFit,
    fit_lorentzian,
    lorentzian_value,
    scaling_factor,
    simulate_frf,
)
from .forward import (
    ControlPair,
    Spectrum,
    beating_envelope,
    drive_value,
    frequency_response,
    nearest_channel,
    phasor_response,
    steady_peak_amplitudes,
)
from .model import (
    Bounds,
    Branch,
    HybridStiffness,
    ParamVector,
    PhysicalParams,
    canonical_point,
    damping_reference,
    default_bounds,
    extract_physical,
    hybrid_damping,
    hybrid_eigenvalues,
    physical_stiffness_from_hybrid,
    rotation_from_theta,
    stiffness_from_physical,
)
from .sim import TimeWindow, Trajectory, desk_window, simulate_time_domain, spectrum_of_window

__all__ = [
    "Bounds",
    "Branch",
    "ControlPair",
    "FrfSweep",
    "HybridStiffness",
    "LorentzianFit",
    "ParamVector",
    "PhysicalParams",
    "Spectrum",
    "TimeWindow",
    "Trajectory",
    "beating_envelope",
    "canonical_point",
    "damping_reference",
    "default_bounds",
    "desk_window",
    "drive_value",
    "extract_physical",
    "fit_lorentzian",
    "frequency_response",
    "hybrid_damping",
    "hybrid_eigenvalues",
    "lorentzian_value",
    "nearest_channel",
    "phasor_response",
    "physical_stiffness_from_hybrid",
    "rotation_from_theta",
    "scaling_factor",
    "simulate_frf",
    "simulate_time_domain",
    "spectrum_of_window",
    "steady_peak_amplitudes",
    "stiffness_from_physical",
]
