#!/usr/bin/env python3
"""
Command-line surface: synthetic generation, FRF calibration, identification,
forward simulation and report emission.

Every subcommand is deterministic given its inputs and seed. Diagnostics go to
stderr through logging; summary tables are printed to stdout.

Exit codes: 0 success, 2 configuration or data errors, 3 calibration
failures, 4 identification failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from common.experiment.experiment import ExperimentSet
from common.experiment.io import (
    CSV_FLOAT_FORMAT,
    FRF_NAME,
    ExperimentConfig,
    experiment_from_config,
    load_config,
    read_frf_csv,
    save_experiment,
    write_spectrum_csv,
)
from common.experiment.synthetic import GridSpec, SyntheticTruth, generate_synthetic, spectrum_grid
from common.oscillator.calibration import fit_lorentzian, scaling_factor
from common.oscillator.forward import ControlPair, steady_peak_amplitudes
from common.oscillator.model import Branch, HybridStiffness, ParamVector
from common.oscillator.sim import desk_window, simulate_time_domain, spectrum_of_window
from common.shared.errors import (
    CalibrationError,
    DataError,
    ForwardError,
    IdentificationError,
    ModelError,
    ReconstructionFailed,
    SchemaError,
)
from common.shared.metrics import ReconstructionMetrics
from identify.objective import ObjectiveConfig, model_scaling, reference_point
from identify.reconstruct import (
    IterationRecord,
    ReconstructionConfig,
    ReconstructionReport,
    reconstruct,
    solve_fixed_nu,
)

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CALIBRATION = 3
EXIT_IDENTIFICATION = 4

REPORT_NAME = "report.json"
DEVIATION_NAME = "deviation.csv"
HISTORY_NAME = "history.csv"
CALIBRATION_NAME = "calibration.json"
IMPROVEMENT_NAME = "improvement.csv"
SUMMARY_NAME = "summary.txt"
DEFAULT_OUT = "results"
DEFAULT_REPORT_OUT = "summary"

# RK4 steps above this are refused; the oracle is meant for desk-scale configs
ORACLE_MAX_STEPS = 20_000_000


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def configure_logging(verbosity: int) -> None:
    level = logging.INFO
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _write_json(path: Path, payload: Mapping[str, Any]) -> Path:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    _logger.info("wrote %s", path)
    return path


def _write_frame(path: Path, rows: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> Path:
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    _logger.info("wrote %s (%d rows)", path, len(frame))
    return path


def _require_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is None:
        raise SchemaError(f"{args.command} needs --config")
    config = load_config(args.config)
    if args.channel is not None:
        channel = "auto" if args.channel == "auto" else int(args.channel)
        config = replace(config, channel=channel)
    return config


def _data_dir(args: argparse.Namespace, config: ExperimentConfig) -> Path:
    return Path(args.data) if args.data is not None else config.path.parent


def _out_dir(
    args: argparse.Namespace, default: Optional[Path] = None, inputs: Sequence[Path] = ()
) -> Path:
    """The output directory, created on demand; it may not be one of ``inputs``."""
    directory = Path(args.out) if args.out is not None else (default or Path(DEFAULT_OUT))
    resolved = directory.resolve()
    for source in inputs:
        if resolved == Path(source).resolve():
            raise SchemaError(
                f"{args.command} would write into its input directory; pass a different --out",
                file=str(directory),
            )
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _branches(choice: str) -> tuple[Branch, ...]:
    if choice == "both":
        return (Branch.ROTATION, Branch.REFLECTION)
    return (Branch(choice),)


def _explicit_point(args: argparse.Namespace) -> Optional[ParamVector]:
    if args.p is None:
        return None
    branch = Branch.ROTATION if args.branch == "both" else Branch(args.branch)
    theta, d1, d2 = args.p
    return ParamVector(theta=theta, d1=d1, d2=d2, branch=branch)


def config_sections(config: ExperimentConfig) -> Dict[str, Any]:
    """bounds / references / algorithm sections of ``config`` with base-unit tags."""
    bounds = config.bounds
    references: Dict[str, Any] = {"theta_ref": float(config.references.theta)}
    if config.references.d1 is not None:
        references["d1_ref_Hz"] = float(config.references.d1)
    if config.references.d2 is not None:
        references["d2_ref_Hz"] = float(config.references.d2)
    algorithm: Dict[str, Any] = {}
    for key, value in config.algorithm.items():
        if key == "d_floor":
            algorithm["d_floor_Hz"] = float(value)
        elif key in ("l_max", "max_evals"):
            algorithm[key] = int(value)
        else:
            algorithm[key] = float(value)
    return {
        "bounds": {
            "theta_min": bounds.p_min[0],
            "theta_max": bounds.p_max[0],
            "d_min_Hz": bounds.p_min[1],
            "d_max_Hz": bounds.p_max[1],
        },
        "references": references,
        "algorithm": algorithm,
    }


def _truth(config: ExperimentConfig) -> SyntheticTruth:
    if config.truth is None:
        raise SchemaError("missing section [truth]", file=str(config.path))
    return SyntheticTruth.from_mapping(config.truth, config.drift, file=str(config.path))


def _frf_floor(config: ExperimentConfig) -> float:
    if config.frf_noise_floor is not None:
        return config.frf_noise_floor
    return config.noise_floor or 0.0


def _reconstruction_config(config: ExperimentConfig) -> ReconstructionConfig:
    try:
        return ReconstructionConfig.from_mapping(config.algorithm)
    except ValueError as exc:
        raise SchemaError(f"[algorithm]: {exc}", file=str(config.path)) from exc


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    """Write a synthetic experiment (config + CSVs) generated from the [truth] section."""
    if args.out is None:
        raise SchemaError("gen needs --out")
    config = _require_config(args)
    truth = _truth(config)
    if args.seed is not None:
        truth = replace(truth, seed=args.seed)
    grid_spec = GridSpec.from_mapping(config.grid or {})
    channel = None if config.channel == "auto" else int(config.channel)

    data = generate_synthetic(truth, config.pairs, grid_spec, channel=channel)
    extra = config_sections(config)
    extra["truth"] = truth.to_config()
    extra["grid"] = grid_spec.to_config()
    out = _out_dir(args, inputs=(config.path.parent,))
    config_path = save_experiment(data, out, extra_config=extra)

    # the written set must load back cleanly
    experiment_from_config(load_config(config_path))
    print(f"wrote {data.n_c} pairs (channel {data.channel}, seed {truth.seed}) to {config_path.parent}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# calibrate
# ---------------------------------------------------------------------------


def cmd_calibrate(args: argparse.Namespace) -> int:
    """Fit the Lorentzian to frf.csv and report χ at the reference point."""
    config = _require_config(args)
    data = experiment_from_config(config, _data_dir(args, config))
    fit = fit_lorentzian(data.frf, squared=args.squared)
    p_ref = reference_point(data, config.references)
    chi = model_scaling(p_ref, data)

    payload = {
        "fit": fit.to_dict(),
        "d_from_Q_Hz": fit.eta / fit.quality,
        "chi": chi,
        "channel": data.channel,
        "noise_floor_V": data.frf.noise_floor,
        "p_ref": p_ref.to_dict(),
    }
    out = _out_dir(args, inputs=(_data_dir(args, config),))
    _write_json(out / CALIBRATION_NAME, payload)
    print(
        f"eta={fit.eta:.3f} Hz  linewidth={fit.linewidth_hz:.4g} Hz  Q={fit.quality:.4g}  "
        f"A_peak={fit.peak_amplitude:.4g} V  chi={chi:.6g}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def _deviation_rows(data: ExperimentSet, report: ReconstructionReport) -> List[Dict[str, Any]]:
    rows = []
    initial = report.deviations.initial
    final = report.deviations.final
    for m, pair in enumerate(data.pairs, start=1):
        for k, u in enumerate(pair.tones):
            i = 2 * (m - 1) + k
            rows.append(
                {
                    "m": m,
                    "tone": k + 1,
                    "u_Hz": u,
                    "z_lab_V": float(data.lab_peaks[m - 1, k]),
                    "dev_initial": float(initial[i]),
                    "dev_final": float(final[i]),
                }
            )
    return rows


HISTORY_COLUMNS = (
    "iteration",
    "branch",
    "nu",
    "J_fit",
    "J_reg",
    "theta",
    "d1_Hz",
    "d2_Hz",
    "E",
    "best_J_fit",
    "evaluations",
)
DEVIATION_COLUMNS = ("m", "tone", "u_Hz", "z_lab_V", "dev_initial", "dev_final")


def _write_history(out: Path, history: Sequence[IterationRecord]) -> Path:
    return _write_frame(out / HISTORY_NAME, [r.to_row() for r in history], HISTORY_COLUMNS)


def cmd_fit(args: argparse.Namespace) -> int:
    """Run the reconstruction and write report.json, deviation.csv and history.csv."""
    config = _require_config(args)
    data = experiment_from_config(config, _data_dir(args, config))
    cfg = _reconstruction_config(config)
    p_ref = reference_point(data, config.references)
    obj_base = ObjectiveConfig(nu=cfg.nu0, p_ref=p_ref, bounds=config.bounds, d_floor=cfg.d_floor)
    p0 = _explicit_point(args) or ParamVector(0.0, 0.0, 0.0)
    branches = _branches(args.branch)
    out = _out_dir(args, inputs=(_data_dir(args, config),))

    metrics = ReconstructionMetrics()
    try:
        if args.fixed_nu is not None:
            report = solve_fixed_nu(
                data, p0, args.fixed_nu, obj_base, cfg, branches=branches, metrics=metrics
            )
        else:
            report = reconstruct(data, p0, cfg, obj_base, branches=branches, metrics=metrics)
    except ReconstructionFailed as exc:
        _write_history(out, exc.history)
        raise

    payload = report.to_dict()
    payload["tones"] = [
        {"m": m, "tone": k + 1, "u_Hz": u}
        for m, pair in enumerate(data.pairs, start=1)
        for k, u in enumerate(pair.tones)
    ]
    payload["channel"] = data.channel
    _write_json(out / REPORT_NAME, payload)
    _write_frame(out / DEVIATION_NAME, _deviation_rows(data, report), DEVIATION_COLUMNS)
    _write_history(out, report.history)
    _logger.debug("evaluation timing: %s", metrics.timing_summary())

    spread = report.coupling.coupling_spread
    print(
        f"theta={report.p_opt.theta:.6f} ({report.p_opt.branch.value})  "
        f"d=({report.p_opt.d1:.4f}, {report.p_opt.d2:.4f}) Hz  "
        f"<lambda>={spread.mean / 1e6:.4f} MHz  "
        f"deviation {report.deviations.mean_initial:.3f} -> {report.deviations.mean_final:.3f}  "
        f"stop: {report.stop.value}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _closed_form_spectrum(
    p: ParamVector,
    hybrid: HybridStiffness,
    pair: ControlPair,
    channel: int,
    grid_spec: GridSpec,
    chi: float,
) -> tuple[np.ndarray, np.ndarray]:
    freqs, k0 = spectrum_grid(pair, grid_spec)
    amplitudes = np.zeros(freqs.size)
    z = steady_peak_amplitudes(p, hybrid, pair, channel)
    for u, height in zip(pair.tones, z):
        amplitudes[int(round(u / grid_spec.resolution)) - k0] += chi * height
    return freqs, amplitudes


def _oracle_spectrum(
    p: ParamVector,
    hybrid: HybridStiffness,
    pair: ControlPair,
    channel: int,
    grid_spec: GridSpec,
    chi: float,
    d_floor: float,
) -> tuple[np.ndarray, np.ndarray]:
    freqs, k0 = spectrum_grid(pair, grid_spec)
    window = desk_window(p, hybrid, pair, grid_spec.resolution, d_floor=d_floor)
    steps = window.n_transient + window.n_samples
    if steps > ORACLE_MAX_STEPS:
        raise SchemaError(
            f"time-domain oracle would need {steps} RK4 steps (limit {ORACLE_MAX_STEPS}); "
            "use a desk-scale configuration"
        )
    spectrum = spectrum_of_window(simulate_time_domain(p, hybrid, pair, window), window, channel)
    amplitudes = np.zeros(freqs.size)
    available = spectrum.amplitudes[k0 : k0 + freqs.size]
    amplitudes[: available.size] = chi * available
    return freqs, amplitudes


def cmd_simulate(args: argparse.Namespace) -> int:
    """Write sim_pair_<m>.csv spectra at an explicit p (or the [truth] point)."""
    config = _require_config(args)
    p = _explicit_point(args)
    if p is None:
        if config.truth is None:
            raise SchemaError("simulate needs --p THETA D1 D2 or a [truth] section")
        p = _truth(config).param_vector
    grid_spec = GridSpec.from_mapping(config.grid or {})
    channel = config.resolve_channel()
    hybrids = config.drift.interpolate(config.n_c)
    d_floor = _reconstruction_config(config).d_floor
    sim_p = replace(p, d1=max(p.d1, d_floor), d2=max(p.d2, d_floor))

    chi = 1.0
    frf_path = _data_dir(args, config) / FRF_NAME
    if frf_path.is_file():
        sweep = read_frf_csv(frf_path, noise_floor=_frf_floor(config))
        chi = scaling_factor(sim_p, sweep.above_floor(), hybrids[0], sweep.frequencies, channel)
    else:
        _logger.info("no %s next to the data; spectra are left unscaled", FRF_NAME)

    out = _out_dir(args, inputs=(_data_dir(args, config),))
    for m, (pair, hybrid) in enumerate(zip(config.pairs, hybrids), start=1):
        if args.oracle:
            freqs, amplitudes = _oracle_spectrum(sim_p, hybrid, pair, channel, grid_spec, chi, d_floor)
        else:
            freqs, amplitudes = _closed_form_spectrum(sim_p, hybrid, pair, channel, grid_spec, chi)
        write_spectrum_csv(out / f"sim_pair_{m}.csv", freqs, amplitudes)
    print(
        f"simulated {config.n_c} pairs at theta={p.theta:.6f} d=({p.d1:.4g}, {p.d2:.4g}) Hz "
        f"({'RK4 oracle' if args.oracle else 'closed form'}, chi={chi:.6g}) into {out}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


IMPROVEMENT_COLUMNS = ("m", "tone", "u_Hz", "dev_initial", "dev_final", "ratio")


def improvement_rows(report: Mapping[str, Any]) -> List[Dict[str, Any]]:
    deviations = report["deviations"]
    rows = []
    for tone, initial, final in zip(report["tones"], deviations["initial"], deviations["final"]):
        if initial == 0:
            ratio = 1.0 if final == 0 else math.inf
        else:
            ratio = final / initial
        rows.append({**tone, "dev_initial": initial, "dev_final": final, "ratio": ratio})
    return rows


def summary_table(report: Mapping[str, Any]) -> str:
    """Averaged coefficients in MHz (4 decimals) with range and sample std."""
    coupling = report["coupling"]
    p_opt = report["p_opt"]
    offsets = report["damping_offsets_Hz"]
    deviations = report["deviations"]
    lines = [
        f"{'quantity':<10}{'mean [MHz]':>12}{'min [MHz]':>12}{'max [MHz]':>12}{'std [MHz]':>12}",
    ]
    for label, key in (("<lambda>", "lambda_Hz"), ("<f1>", "f1_Hz"), ("<f2>", "f2_Hz")):
        spread = coupling[key]
        lines.append(
            f"{label:<10}"
            + "".join(f"{spread[s] / 1e6:>12.4f}" for s in ("mean", "min", "max", "std"))
        )
    lines.append("")
    lines.append(f"theta      {p_opt['theta']:.4f} rad ({p_opt['branch']})")
    lines.append(
        f"d1, d2     {p_opt['d1_Hz']:.4f}, {p_opt['d2_Hz']:.4f} Hz "
        f"(offsets {offsets['d1']:+.4f}, {offsets['d2']:+.4f} Hz)"
    )
    lines.append(
        f"deviation  {deviations['mean_initial']:.4f} -> {deviations['mean_final']:.4f} "
        f"(ratio {deviations['improvement']:.4f})"
    )
    return "\n".join(lines) + "\n"


def cmd_report(args: argparse.Namespace) -> int:
    """Emit improvement.csv and summary.txt from a report.json."""
    source = Path(args.data or DEFAULT_OUT)
    path = source / REPORT_NAME
    if not path.is_file():
        raise SchemaError("report not found", file=str(path))
    try:
        report = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"unreadable report: {exc.msg}", file=str(path), line=exc.lineno) from exc

    out = _out_dir(args, Path(DEFAULT_REPORT_OUT), inputs=(source,))
    _write_frame(out / IMPROVEMENT_NAME, improvement_rows(report), IMPROVEMENT_COLUMNS)
    table = summary_table(report)
    (out / SUMMARY_NAME).write_text(table, encoding="utf-8")
    print(table, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "gen": cmd_gen,
    "calibrate": cmd_calibrate,
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="experiment.yaml")
    common.add_argument(
        "--data", type=str, help="input directory (default: next to the config; results/ for report)"
    )
    common.add_argument("--out", type=str, help="output directory")
    common.add_argument("--seed", type=int, help="RNG seed (gen)")
    common.add_argument("--channel", choices=["1", "2", "auto"], help="observed hybrid channel")
    common.add_argument(
        "--branch", choices=["rotation", "reflection", "both"], default="both", help="O(2) branch"
    )
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_const", const=1, dest="verbosity", default=0)
    verbosity.add_argument("-q", "--quiet", action="store_const", const=-1, dest="verbosity")

    ap = argparse.ArgumentParser(
        prog="modecouple", description="Two-mode coupling and damping reconstruction"
    )
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", parents=[common], help="generate a synthetic experiment")
    cal = sub.add_parser("calibrate", parents=[common], help="fit the FRF sweep")
    cal.add_argument("--squared", action="store_true", help="fit the squared amplitude curve")
    fit = sub.add_parser("fit", parents=[common], help="reconstruct (theta, d1, d2)")
    fit.add_argument("--p", type=float, nargs=3, metavar=("THETA", "D1", "D2"), help="initial guess (Hz)")
    fit.add_argument("--fixed-nu", type=float, dest="fixed_nu", help="single solve at this weight")
    sim = sub.add_parser("simulate", parents=[common], help="simulated spectra at a given p")
    sim.add_argument("--p", type=float, nargs=3, metavar=("THETA", "D1", "D2"), help="parameters (Hz)")
    sim.add_argument("--oracle", action="store_true", help="use the RK4 time-domain path")
    sub.add_parser("report", parents=[common], help="improvement table and summary")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbosity)
    try:
        return COMMANDS[args.command](args)
    except (DataError, ModelError) as exc:
        _logger.error("%s", exc)
        return EXIT_CONFIG
    except CalibrationError as exc:
        _logger.error("calibration failed: %s", exc)
        return EXIT_CALIBRATION
    except (IdentificationError, ForwardError) as exc:
        _logger.error("identification failed: %s", exc)
        return EXIT_IDENTIFICATION


if __name__ == "__main__":
    raise SystemExit(main())
