#!/usr/bin/env python3
"""
Forward-solver benchmark: closed-form steady peaks against the RK4 oracle.

Runs Monte Carlo trials on desk-scale random parameter vectors and prints the
worst relative peak mismatch, the pass rate at the tolerance and the time per
path.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from pathlib import Path

# Ensure project root import
ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

import numpy as np

from common.experiment.scenarios import DESK_HYBRID, DESK_RESOLUTION_HZ, desk_pairs
from common.oscillator.forward import ControlPair, steady_peak_amplitudes
from common.oscillator.model import Branch, ParamVector
from common.oscillator.sim import desk_window, simulate_time_domain, spectrum_of_window
from common.shared.utils import make_rng


def random_params(rng: np.random.Generator, d_min: float, d_max: float) -> ParamVector:
    branch = Branch.ROTATION if rng.random() < 0.5 else Branch.REFLECTION
    return ParamVector(
        theta=float(rng.uniform(-np.pi, np.pi)),
        d1=float(rng.uniform(d_min, d_max)),
        d2=float(rng.uniform(d_min, d_max)),
        branch=branch,
    )


def run_trial(
    p: ParamVector, pair: ControlPair, channel: int, resolution: float
) -> tuple[float, float, float]:
    """Worst relative mismatch over both tones, closed-form time, oracle time."""
    start = time.perf_counter()
    z = steady_peak_amplitudes(p, DESK_HYBRID, pair, channel)
    closed_time = time.perf_counter() - start

    start = time.perf_counter()
    window = desk_window(p, DESK_HYBRID, pair, resolution)
    spectrum = spectrum_of_window(
        simulate_time_domain(p, DESK_HYBRID, pair, window), window, channel
    )
    oracle_time = time.perf_counter() - start

    worst = 0.0
    for u, expected in zip(pair.tones, z):
        k = int(round(u / spectrum.resolution))
        worst = max(worst, abs(spectrum.amplitudes[k] - expected) / expected)
    return worst, closed_time, oracle_time


def main() -> int:
    ap = argparse.ArgumentParser(description="Closed-form vs RK4 forward benchmark")
    ap.add_argument("--trials", type=int, default=50, help="random instances")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--d", type=str, default="1.0,3.0", help="damping range in Hz, comma pair")
    ap.add_argument("--channel", type=int, choices=[1, 2], default=1)
    ap.add_argument("--tol", type=float, default=1e-3, help="relative tolerance")
    args = ap.parse_args()

    d_min, d_max = (float(x) for x in args.d.split(","))
    rng = make_rng(args.seed)
    pairs = desk_pairs()

    print(
        f"hybrid=({DESK_HYBRID.eta_plus}, {DESK_HYBRID.eta_minus}) Hz d∈[{d_min}, {d_max}] Hz "
        f"channel={args.channel} trials={args.trials}"
    )
    errors = []
    closed_times = []
    oracle_times = []
    for _ in range(args.trials):
        p = random_params(rng, d_min, d_max)
        pair = pairs[int(rng.integers(len(pairs)))]
        err, t_closed, t_oracle = run_trial(p, pair, args.channel, DESK_RESOLUTION_HZ)
        errors.append(err)
        closed_times.append(t_closed)
        oracle_times.append(t_oracle)

    passed = sum(1 for e in errors if e <= args.tol)
    print(
        f"max rel err={max(errors):.3e} median={statistics.median(errors):.3e} "
        f"pass={passed / args.trials * 100:5.1f}% @ {args.tol:g}"
    )
    print(
        f"closed form≈{statistics.fmean(closed_times) * 1e6:.1f}µs "
        f"oracle≈{statistics.fmean(oracle_times) * 1e3:.1f}ms"
    )
    return 0 if passed == args.trials else 1


if __name__ == "__main__":
    raise SystemExit(main())
