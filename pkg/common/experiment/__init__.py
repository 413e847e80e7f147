# File: common/experiment/__init__.py
"""
Experiment data: configuration and CSV files, spectrum post-processing,
eigenfrequency drift and the synthetic campaign generator.
"""

from .experiment import DriftSpec, ExperimentSet, drift_interpolate
from .io import (
    ExperimentConfig,
    References,
    load_config,
    load_experiment,
    read_frf_csv,
    read_spectrum_csv,
    save_experiment,
    write_spectrum_csv,
)
from .spectra import estimate_noise_floor, extract_peak, lab_peak_amplitudes, subtract_noise
from .synthetic import GridSpec, SyntheticTruth, generate_synthetic, truth_peak_amplitudes

__all__ = [
    "DriftSpec",
    "ExperimentConfig",
    "ExperimentSet",
    "GridSpec",
    "References",
    "SyntheticTruth",
    "drift_interpolate",
    "estimate_noise_floor",
    "extract_peak",
    "generate_synthetic",
    "lab_peak_amplitudes",
    "load_config",
    "load_experiment",
    "read_frf_csv",
    "read_spectrum_csv",
    "save_experiment",
    "subtract_noise",
    "truth_peak_amplitudes",
    "write_spectrum_csv",
]
