"""
Experiment files: the YAML configuration and the per-pair spectrum / FRF CSVs.

Config keys carry unit tags (``u1_MHz``, ``noise_floor_uV``) that are converted
to Hz and V on load. Files are written back with base-unit tags and 17
significant digits, so ``load_experiment(save_experiment(data))`` reproduces
every numeric field bit for bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import yaml

from ..oscillator.calibration import FrfSweep
from ..oscillator.forward import ControlPair, Spectrum, nearest_channel
from ..oscillator.model import Bounds, default_bounds
from ..shared.errors import DataError, SchemaError
from ..shared.utils import lookup_tagged
from .experiment import DriftSpec, ExperimentSet
from .spectra import DEFAULT_HALF_WINDOW_BINS, estimate_noise_floor

_logger = logging.getLogger(__name__)

CONFIG_NAME = "experiment.yaml"
FRF_NAME = "frf.csv"
SPECTRUM_COLUMNS = ("frequency_Hz", "amplitude_V")
CSV_FLOAT_FORMAT = "%.17g"
THETA_REF_DEFAULT = math.pi / 2 + math.pi / 8

ALGORITHM_KEYS = ("nu0", "beta", "tol", "l_max", "inner_tol", "max_evals", "simplex_step", "discrepancy")


def spectrum_file_name(m: int) -> str:
    return f"pair_{m}.csv"


@dataclass(frozen=True)
class References:
    """Tikhonov reference point; missing dampings fall back to η±/Q± of the first pair."""

    theta: float = THETA_REF_DEFAULT
    d1: Optional[float] = None
    d2: Optional[float] = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed configuration file, all values in Hz / V."""

    path: Path
    pairs: Tuple[ControlPair, ...]
    drift: DriftSpec
    q_plus: float
    q_minus: float
    channel: int | str = "auto"
    noise_floor: Optional[float] = None
    frf_noise_floor: Optional[float] = None
    half_window_bins: int = DEFAULT_HALF_WINDOW_BINS
    bounds: Bounds = field(default_factory=default_bounds)
    references: References = field(default_factory=References)
    algorithm: Dict[str, float] = field(default_factory=dict)
    truth: Optional[Dict[str, Any]] = None
    grid: Optional[Dict[str, Any]] = None

    @property
    def n_c(self) -> int:
        return len(self.pairs)

    @property
    def amplitude(self) -> float:
        return self.pairs[0].amplitude

    def resolve_channel(self) -> int:
        """Configured channel, or the channel of the eigenfrequency nearer the drives."""
        if self.channel != "auto":
            return int(self.channel)
        centre = 0.5 * (self.pairs[0].u1 + self.pairs[0].u2)
        return nearest_channel(self.drift.start, centre)


# ---------------------------------------------------------------------------
# YAML configuration
# ---------------------------------------------------------------------------


class _ConfigReader:
    """Section accessors that turn missing or malformed keys into located SchemaErrors."""

    def __init__(self, path: Path, text: str):
        self.file = str(path)
        self.lines: Dict[str, int] = {}
        try:
            root = yaml.compose(text, Loader=yaml.SafeLoader)
            self.raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise SchemaError(
                f"invalid YAML: {exc}",
                file=self.file,
                line=None if mark is None else mark.line + 1,
            ) from exc
        if not isinstance(self.raw, dict):
            raise SchemaError("configuration must be a mapping", file=self.file, line=1)
        if isinstance(root, yaml.MappingNode):
            for key_node, value_node in root.value:
                self.lines[str(key_node.value)] = key_node.start_mark.line + 1
                if isinstance(value_node, yaml.SequenceNode):
                    for i, item in enumerate(value_node.value):
                        self.lines[f"{key_node.value}[{i}]"] = item.start_mark.line + 1

    def error(self, message: str, where: str, column: Optional[str] = None) -> SchemaError:
        return SchemaError(
            message, file=self.file, line=self.lines.get(where), column=column
        )

    def section(self, name: str, required: bool = True) -> Optional[Mapping[str, Any]]:
        value = self.raw.get(name)
        if value is None:
            if required:
                raise SchemaError(f"missing section [{name}]", file=self.file)
            return None
        if not isinstance(value, dict):
            raise self.error(f"section [{name}] must be a mapping", name)
        return value

    def number(
        self,
        section: Mapping[str, Any],
        key: str,
        where: str,
        default: Optional[float] = None,
    ) -> float:
        if key not in section:
            if default is None:
                raise self.error(f"missing key {key!r} in [{where}]", where, key)
            return default
        try:
            return float(section[key])
        except (TypeError, ValueError):
            raise self.error(f"{key!r} must be a number, got {section[key]!r}", where, key)

    def tagged(
        self,
        section: Mapping[str, Any],
        stem: str,
        family: str,
        where: str,
        required: bool = True,
    ) -> Optional[float]:
        try:
            value = lookup_tagged(section, stem, family)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, DataError):
                raise
            raise self.error(f"{stem!r} must be a number", where, stem) from exc
        if value is None and required:
            raise self.error(f"missing unit-tagged key {stem}_<unit> in [{where}]", where, stem)
        return value


def load_config(config_path: str | Path) -> ExperimentConfig:
    """Parse and validate an experiment configuration file."""
    path = Path(config_path)
    if not path.is_file():
        raise SchemaError("configuration file not found", file=str(path))
    reader = _ConfigReader(path, path.read_text(encoding="utf-8"))

    experiment = reader.section("experiment")
    assert experiment is not None
    n_c = int(reader.number(experiment, "n_c", "experiment"))
    amplitude = reader.number(experiment, "amplitude_A", "experiment", default=1.0)
    channel = experiment.get("channel", "auto")
    if channel not in ("auto", 1, 2):
        raise reader.error(f"channel must be 1, 2 or auto, got {channel!r}", "experiment", "channel")
    noise_floor = reader.tagged(experiment, "noise_floor", "voltage", "experiment", required=False)
    frf_noise_floor = reader.tagged(
        experiment, "frf_noise_floor", "voltage", "experiment", required=False
    )
    half_window_bins = int(
        reader.number(experiment, "half_window_bins", "experiment", DEFAULT_HALF_WINDOW_BINS)
    )

    drift_section = reader.section("drift")
    assert drift_section is not None
    try:
        drift = DriftSpec(
            eta_plus_start=reader.tagged(drift_section, "eta_plus_start", "frequency", "drift"),  # type: ignore[arg-type]
            eta_plus_end=reader.tagged(drift_section, "eta_plus_end", "frequency", "drift"),  # type: ignore[arg-type]
            eta_minus_start=reader.tagged(drift_section, "eta_minus_start", "frequency", "drift"),  # type: ignore[arg-type]
            eta_minus_end=reader.tagged(drift_section, "eta_minus_end", "frequency", "drift"),  # type: ignore[arg-type]
        )
    except DataError:
        raise
    except ValueError as exc:
        raise reader.error(str(exc), "drift") from exc
    q_plus = reader.number(drift_section, "Q_plus", "drift")
    q_minus = reader.number(drift_section, "Q_minus", "drift")

    pairs = _parse_pairs(reader, n_c, amplitude)
    bounds = _parse_bounds(reader)
    references = _parse_references(reader)
    algorithm = _parse_algorithm(reader)

    return ExperimentConfig(
        path=path,
        pairs=pairs,
        drift=drift,
        q_plus=q_plus,
        q_minus=q_minus,
        channel=channel,
        noise_floor=noise_floor,
        frf_noise_floor=frf_noise_floor,
        half_window_bins=half_window_bins,
        bounds=bounds,
        references=references,
        algorithm=algorithm,
        truth=reader.section("truth", required=False),  # type: ignore[arg-type]
        grid=reader.section("grid", required=False),  # type: ignore[arg-type]
    )


def _parse_pairs(reader: _ConfigReader, n_c: int, amplitude: float) -> Tuple[ControlPair, ...]:
    rows = reader.raw.get("pairs")
    if not isinstance(rows, list) or not rows:
        raise reader.error("section [pairs] must be a non-empty list", "pairs")
    if len(rows) != n_c:
        raise reader.error(f"n_c = {n_c} but {len(rows)} pairs are listed", "pairs")
    pairs: List[ControlPair] = []
    for i, row in enumerate(rows):
        where = f"pairs[{i}]"
        if not isinstance(row, dict):
            raise reader.error("each pair must be a mapping", where)
        m = int(reader.number(row, "m", where))
        if m != i + 1:
            raise reader.error(f"pairs must be numbered 1..n_c in order, got m={m}", where, "m")
        u1 = reader.tagged(row, "u1", "frequency", where)
        u2 = reader.tagged(row, "u2", "frequency", where)
        try:
            pairs.append(ControlPair(u1, u2, amplitude))  # type: ignore[arg-type]
        except ValueError as exc:
            raise reader.error(str(exc), where) from exc
    return tuple(pairs)


def _parse_bounds(reader: _ConfigReader) -> Bounds:
    section = reader.section("bounds", required=False)
    base = default_bounds()
    if section is None:
        return base
    theta_min = reader.number(section, "theta_min", "bounds", base.p_min[0])
    theta_max = reader.number(section, "theta_max", "bounds", base.p_max[0])
    d_min = reader.tagged(section, "d_min", "frequency", "bounds", required=False)
    d_max = reader.tagged(section, "d_max", "frequency", "bounds", required=False)
    lo = base.p_min[1] if d_min is None else d_min
    hi = base.p_max[1] if d_max is None else d_max
    try:
        return Bounds(p_min=(theta_min, lo, lo), p_max=(theta_max, hi, hi))
    except ValueError as exc:
        raise reader.error(str(exc), "bounds") from exc


def _parse_references(reader: _ConfigReader) -> References:
    section = reader.section("references", required=False)
    if section is None:
        return References()
    return References(
        theta=reader.number(section, "theta_ref", "references", THETA_REF_DEFAULT),
        d1=reader.tagged(section, "d1_ref", "frequency", "references", required=False),
        d2=reader.tagged(section, "d2_ref", "frequency", "references", required=False),
    )


def _parse_algorithm(reader: _ConfigReader) -> Dict[str, float]:
    section = reader.section("algorithm", required=False)
    if section is None:
        return {}
    out: Dict[str, float] = {}
    for key in section:
        stem = str(key)
        if stem.startswith("d_floor_"):
            out["d_floor"] = reader.tagged(section, "d_floor", "frequency", "algorithm")  # type: ignore[assignment]
        elif stem in ALGORITHM_KEYS:
            out[stem] = reader.number(section, stem, "algorithm")
        else:
            raise reader.error(f"unknown algorithm key {stem!r}", "algorithm", stem)
    return out


# ---------------------------------------------------------------------------
# CSV spectra
# ---------------------------------------------------------------------------


def _read_frame(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    file = str(path)
    if not path.is_file():
        raise SchemaError("file not found", file=file)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise SchemaError(f"unreadable CSV: {exc}", file=file) from exc

    header = [str(c) for c in frame.columns]
    for expected, got in zip(SPECTRUM_COLUMNS, header + [""] * len(SPECTRUM_COLUMNS)):
        if expected != got:
            raise SchemaError(
                f"expected header {','.join(SPECTRUM_COLUMNS)}", file=file, line=1, column=got or expected
            )
    if len(header) != len(SPECTRUM_COLUMNS):
        raise SchemaError(
            f"unexpected extra columns {header[len(SPECTRUM_COLUMNS):]}", file=file, line=1
        )
    if frame.empty:
        raise SchemaError("no data rows", file=file, line=2)

    columns = []
    for name in SPECTRUM_COLUMNS:
        coerced = pd.to_numeric(frame[name], errors="coerce")
        bad = np.flatnonzero(coerced.isna().to_numpy() | ~np.isfinite(coerced.to_numpy(dtype=float)))
        if bad.size:
            row = int(bad[0])
            raise SchemaError(
                f"non-numeric value {frame[name].iloc[row]!r}",
                file=file,
                line=row + 2,
                column=name,
            )
        columns.append(frame[name].to_numpy(dtype=float))
    freqs, amps = columns

    negative = np.flatnonzero(amps < 0)
    if negative.size:
        raise SchemaError(
            "amplitudes must be non-negative", file=file, line=int(negative[0]) + 2, column=SPECTRUM_COLUMNS[1]
        )
    steps = np.flatnonzero(np.diff(freqs) <= 0)
    if steps.size:
        raise SchemaError(
            "frequencies must be strictly increasing",
            file=file,
            line=int(steps[0]) + 3,
            column=SPECTRUM_COLUMNS[0],
        )
    return freqs, amps


def read_spectrum_csv(path: str | Path) -> Spectrum:
    freqs, amps = _read_frame(Path(path))
    return Spectrum(frequencies=freqs, amplitudes=amps)


def read_frf_csv(path: str | Path, noise_floor: float = 0.0) -> FrfSweep:
    freqs, amps = _read_frame(Path(path))
    return FrfSweep(frequencies=freqs, amplitudes=amps, noise_floor=noise_floor)


def write_spectrum_csv(
    path: str | Path, frequencies: Sequence[float], amplitudes: Sequence[float]
) -> Path:
    path = Path(path)
    frame = pd.DataFrame(
        {
            SPECTRUM_COLUMNS[0]: np.asarray(frequencies, dtype=float),
            SPECTRUM_COLUMNS[1]: np.asarray(amplitudes, dtype=float),
        }
    )
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path


# ---------------------------------------------------------------------------
# Whole experiments
# ---------------------------------------------------------------------------


def experiment_from_config(
    config: ExperimentConfig, data_dir: str | Path | None = None
) -> ExperimentSet:
    """Read the CSVs named by ``config`` from ``data_dir`` (default: next to the config)."""
    directory = Path(data_dir) if data_dir is not None else config.path.parent
    spectra = []
    for m in range(1, config.n_c + 1):
        path = directory / spectrum_file_name(m)
        if not path.is_file():
            raise SchemaError(f"missing spectrum for pair {m}", file=str(path))
        spectra.append(read_spectrum_csv(path))

    if config.frf_noise_floor is not None:
        frf_xi = config.frf_noise_floor
    elif config.noise_floor is not None:
        frf_xi = config.noise_floor
    else:
        frf_xi = estimate_noise_floor(spectra)

    data = ExperimentSet(
        pairs=config.pairs,
        drift=config.drift,
        q_plus=config.q_plus,
        q_minus=config.q_minus,
        spectra=tuple(spectra),
        frf=read_frf_csv(directory / FRF_NAME, noise_floor=frf_xi),
        channel=config.resolve_channel(),
        noise_floor=config.noise_floor,
        half_window_bins=config.half_window_bins,
    )
    _logger.info(
        "loaded %d control pairs from %s (channel %d, ξ=%.3e V)",
        data.n_c,
        directory,
        data.channel,
        data.xi,
    )
    return data


def load_experiment(config_path: str | Path, data_dir: str | Path | None = None) -> ExperimentSet:
    """Fully validated experiment from a config file and its CSV directory."""
    return experiment_from_config(load_config(config_path), data_dir)


def experiment_to_config(data: ExperimentSet) -> Dict[str, Any]:
    """Config sections describing ``data`` with base-unit tags."""
    experiment: Dict[str, Any] = {
        "n_c": data.n_c,
        "amplitude_A": float(data.amplitude),
        "channel": int(data.channel),
        "half_window_bins": int(data.half_window_bins),
        "frf_noise_floor_V": float(data.frf.noise_floor),
    }
    if data.noise_floor is not None:
        experiment["noise_floor_V"] = float(data.noise_floor)
    drift = data.drift
    return {
        "experiment": experiment,
        "drift": {
            "eta_plus_start_Hz": float(drift.eta_plus_start),
            "eta_plus_end_Hz": float(drift.eta_plus_end),
            "eta_minus_start_Hz": float(drift.eta_minus_start),
            "eta_minus_end_Hz": float(drift.eta_minus_end),
            "Q_plus": float(data.q_plus),
            "Q_minus": float(data.q_minus),
        },
        "pairs": [
            {"m": m, "u1_Hz": float(pair.u1), "u2_Hz": float(pair.u2)}
            for m, pair in enumerate(data.pairs, start=1)
        ],
    }


def save_experiment(
    data: ExperimentSet,
    out_dir: str | Path,
    extra_config: Optional[Mapping[str, Any]] = None,
) -> Path:
    """
    Write ``experiment.yaml``, ``pair_<m>.csv`` and ``frf.csv`` to ``out_dir``.

    ``extra_config`` adds whole sections (bounds, references, algorithm, truth,
    grid) to the configuration. Returns the config path.
    """
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    config = experiment_to_config(data)
    for name, section in (extra_config or {}).items():
        config[name] = section
    config_path = directory / CONFIG_NAME
    config_path.write_text(
        yaml.safe_dump(config, sort_keys=False, default_flow_style=False), encoding="utf-8"
    )
    for m, spectrum in enumerate(data.spectra, start=1):
        write_spectrum_csv(directory / spectrum_file_name(m), spectrum.frequencies, spectrum.amplitudes)
    write_spectrum_csv(directory / FRF_NAME, data.frf.frequencies, data.frf.amplitudes)
    _logger.info("wrote experiment with %d pairs to %s", data.n_c, directory)
    return config_path


__all__ = [
    "CONFIG_NAME",
    "FRF_NAME",
    "SPECTRUM_COLUMNS",
    "THETA_REF_DEFAULT",
    "References",
    "ExperimentConfig",
    "spectrum_file_name",
    "load_config",
    "read_spectrum_csv",
    "read_frf_csv",
    "write_spectrum_csv",
    "experiment_from_config",
    "load_experiment",
    "experiment_to_config",
    "save_experiment",
]
