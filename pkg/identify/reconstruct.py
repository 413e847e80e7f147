"""
Iterative reconstruction with a shrinking regularization weight.

Each outer iteration ℓ minimizes J with ν_ℓ = ν0·β^ℓ over the box, starting
from the previous iterate, and measures

    E = ‖p^{ℓ+1} − p^ℓ‖₂ + |J_fit(p^{ℓ+1}) − J_reg^{ν_{ℓ+1}}(p^{ℓ+1})|

The loop stops when E <= tol, when two successive iterates fit the lab peaks
to within the noise level (J_fit <= discrepancy · noise misfit), or after
l_max iterations. Both O(2) branches are run in full; the reported point is
the canonical form of the best branch's optimum.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from statistics import fmean, stdev
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from common.experiment.experiment import ExperimentSet
from common.oscillator.model import (
    Branch,
    HybridStiffness,
    ParamVector,
    canonical_point,
    extract_physical,
    physical_stiffness_from_hybrid,
    rotation_from_theta,
)
from common.shared.errors import EvaluationFailed, ReconstructionFailed
from common.shared.metrics import ReconstructionMetrics
from .minimize import MAX_EVALS_DEFAULT, minimize_box
from .objective import (
    D_FLOOR_DEFAULT,
    Evaluation,
    ObjectiveConfig,
    ObjectiveEvaluator,
    clamp_damping,
    noise_misfit,
)

_logger = logging.getLogger(__name__)

MIN_SIMPLEX_STEP = 1e-4
BRANCH_TIE_RTOL = 1e-6
BRANCH_TIE_ATOL = 1e-12


@dataclass(frozen=True)
class ReconstructionConfig:
    """Outer-loop hyperparameters and the inner solver budget."""

    nu0: float = 0.1
    beta: float = 0.1
    tol: float = 1e-12
    l_max: int = 9
    d_floor: float = D_FLOOR_DEFAULT
    inner_tol: float = 1e-8
    max_evals: int = MAX_EVALS_DEFAULT
    simplex_step: float = 0.1
    discrepancy: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.nu0 >= 0:
            raise ValueError(f"nu0 must be non-negative, got {self.nu0}")
        if not self.tol >= 0:
            raise ValueError(f"tol must be non-negative, got {self.tol}")
        if self.l_max < 1:
            raise ValueError(f"l_max must be >= 1, got {self.l_max}")
        if not self.d_floor > 0:
            raise ValueError(f"d_floor must be positive, got {self.d_floor}")
        if not self.discrepancy >= 0:
            raise ValueError(f"discrepancy must be non-negative, got {self.discrepancy}")
        if self.max_evals < 1:
            raise ValueError(f"max_evals must be >= 1, got {self.max_evals}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, float]) -> "ReconstructionConfig":
        """Build from a parsed ``algorithm`` section (dampings already in Hz)."""
        kwargs: Dict[str, Any] = {}
        for key, value in values.items():
            if key in ("l_max", "max_evals"):
                kwargs[key] = int(value)
            else:
                kwargs[key] = float(value)
        return cls(**kwargs)

    def nu(self, iteration: int) -> float:
        """ν_ℓ = ν0·β^ℓ."""
        return self.nu0 * self.beta**iteration


@dataclass(frozen=True)
class IterationRecord:
    """One outer iteration: the weight used, the objective split and the new iterate."""

    iteration: int
    nu: float
    j_fit: float
    j_reg: float
    theta: float
    d1: float
    d2: float
    branch: Branch
    error: float
    best_fit: float
    evaluations: int

    def to_row(self) -> Dict[str, Any]:
        return {
            "iteration": self.iteration,
            "branch": self.branch.value,
            "nu": self.nu,
            "J_fit": self.j_fit,
            "J_reg": self.j_reg,
            "theta": self.theta,
            "d1_Hz": self.d1,
            "d2_Hz": self.d2,
            "E": self.error,
            "best_J_fit": self.best_fit,
            "evaluations": self.evaluations,
        }


@dataclass(frozen=True)
class Spread:
    """Arithmetic mean with min–max range and sample standard deviation."""

    mean: float
    minimum: float
    maximum: float
    std: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Spread":
        if not values:
            raise ValueError("cannot summarize an empty sequence")
        std = stdev(values) if len(values) > 1 else 0.0
        mean = fmean(values)
        # fmean may round just outside the range for near-constant inputs
        mean = min(max(mean, min(values)), max(values))
        return cls(mean=mean, minimum=min(values), maximum=max(values), std=std)

    def to_dict(self) -> Dict[str, float]:
        return {"mean": self.mean, "min": self.minimum, "max": self.maximum, "std": self.std}


@dataclass(frozen=True)
class CouplingSummary:
    """Per-pair (f1, f2, λ) extracted at the optimal transformation, with averages."""

    f1: Tuple[float, ...]
    f2: Tuple[float, ...]
    coupling: Tuple[float, ...]
    coupling_sign: Tuple[int, ...]

    @property
    def coupling_spread(self) -> Spread:
        return Spread.of(self.coupling)

    @property
    def f1_spread(self) -> Spread:
        return Spread.of(self.f1)

    @property
    def f2_spread(self) -> Spread:
        return Spread.of(self.f2)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_pair": [
                {"m": m, "f1_Hz": f1, "f2_Hz": f2, "lambda_Hz": lam, "coupling_sign": sign}
                for m, (f1, f2, lam, sign) in enumerate(
                    zip(self.f1, self.f2, self.coupling, self.coupling_sign), start=1
                )
            ],
            "lambda_Hz": self.coupling_spread.to_dict(),
            "f1_Hz": self.f1_spread.to_dict(),
            "f2_Hz": self.f2_spread.to_dict(),
        }


def aggregate_coupling(
    theta_opt: float, branch: Branch, per_pair_hybrid: Sequence[HybridStiffness]
) -> CouplingSummary:
    """Extract (f1, f2, λ) from 𝒯ᵀ𝒞̃^m𝒯 for every pair."""
    if not per_pair_hybrid:
        raise ValueError("at least one hybrid stiffness is required")
    T = rotation_from_theta(theta_opt, branch)
    rows = [extract_physical(physical_stiffness_from_hybrid(T, h)) for h in per_pair_hybrid]
    f1, f2, coupling, sign = (tuple(col) for col in zip(*rows))
    if any(s < 0 for s in sign):
        _logger.warning(
            "positive off-diagonal stiffness at theta=%.6f (%s): coupling_sign=-1", theta_opt, branch.value
        )
    return CouplingSummary(f1=f1, f2=f2, coupling=coupling, coupling_sign=sign)  # type: ignore[arg-type]


@dataclass(frozen=True)
class DeviationSummary:
    """Deviation vectors before and after the reconstruction."""

    initial: np.ndarray
    final: np.ndarray

    @property
    def mean_initial(self) -> float:
        return float(np.mean(self.initial))

    @property
    def mean_final(self) -> float:
        return float(np.mean(self.final))

    @property
    def ratios(self) -> np.ndarray:
        """Per-tone final/initial; 1 where both vanish, inf where only the initial does."""
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = self.final / self.initial
        ratio = np.where((self.initial == 0) & (self.final == 0), 1.0, ratio)
        return np.where((self.initial == 0) & (self.final > 0), np.inf, ratio)

    @property
    def improvement(self) -> float:
        """Mean final over mean initial deviation."""
        if self.mean_initial == 0:
            return 1.0 if self.mean_final == 0 else math.inf
        return self.mean_final / self.mean_initial

    def to_dict(self) -> Dict[str, Any]:
        return {
            "initial": self.initial.tolist(),
            "final": self.final.tolist(),
            "mean_initial": self.mean_initial,
            "mean_final": self.mean_final,
            "improvement": self.improvement,
        }


class StopReason(str, Enum):
    TOLERANCE = "tolerance"
    NOISE_LEVEL = "noise level"
    ITERATION_CAP = "iteration cap"


@dataclass(frozen=True)
class BranchRun:
    branch: Branch
    p_opt: ParamVector
    evaluation: Evaluation
    history: Tuple[IterationRecord, ...]
    nu_schedule: Tuple[float, ...]
    stop: StopReason

    @property
    def j_fit(self) -> float:
        return self.evaluation.fit

    @property
    def converged(self) -> bool:
        return self.stop is not StopReason.ITERATION_CAP

    @property
    def reflected(self) -> bool:
        """True when the canonical form of ``p_opt`` lives on the other branch."""
        return canonical_point(self.p_opt).branch is not self.branch


@dataclass(frozen=True)
class ReconstructionReport:
    """
    Optimal parameters, extracted physics, deviations and the iterate history.

    ``p_fit`` is the optimum as the winning branch found it; ``p_opt`` is its
    canonical form, which has the same 𝒟̃ and a non-positive off-diagonal
    physical stiffness whenever one exists.
    """

    p_opt: ParamVector
    p_fit: ParamVector
    p0: ParamVector
    p_ref: ParamVector
    chi: float
    j_fit: float
    coupling: CouplingSummary
    deviations: DeviationSummary
    nu_schedule: Tuple[float, ...]
    history: Tuple[IterationRecord, ...]
    branch_fits: Dict[str, float]
    converged: bool
    stop: StopReason = StopReason.ITERATION_CAP
    noise_level: float = 0.0
    failed_branches: Tuple[str, ...] = ()
    metrics: Dict[str, Any] = field(default_factory=dict)

    @property
    def damping_offsets(self) -> Tuple[float, float]:
        """d̄_i = d_i − d_i^ref."""
        return self.p_opt.d1 - self.p_ref.d1, self.p_opt.d2 - self.p_ref.d2

    def to_dict(self) -> Dict[str, Any]:
        d1_bar, d2_bar = self.damping_offsets
        return {
            "p_opt": self.p_opt.to_dict(),
            "p_fit": self.p_fit.to_dict(),
            "p0": self.p0.to_dict(),
            "p_ref": self.p_ref.to_dict(),
            "damping_offsets_Hz": {"d1": d1_bar, "d2": d2_bar},
            "chi": self.chi,
            "J_fit": self.j_fit,
            "noise_level": self.noise_level,
            "coupling": self.coupling.to_dict(),
            "deviations": self.deviations.to_dict(),
            "nu_schedule": list(self.nu_schedule),
            "history": [record.to_row() for record in self.history],
            "branch_J_fit": dict(sorted(self.branch_fits.items())),
            "failed_branches": list(self.failed_branches),
            "converged": self.converged,
            "stop": self.stop.value,
            "metrics": self.metrics,
        }


def _run_branch(
    data: ExperimentSet,
    p0: ParamVector,
    cfg: ReconstructionConfig,
    obj_base: ObjectiveConfig,
    metrics: ReconstructionMetrics,
    noise_level: float,
) -> BranchRun:
    branch = p0.branch
    bounds = obj_base.bounds
    p = p0.as_array()
    p_ref = obj_base.p_ref.as_array()
    width = bounds.upper - bounds.lower
    step = cfg.simplex_step
    history: List[IterationRecord] = []
    schedule: List[float] = []
    best_fit = math.inf
    stop = StopReason.ITERATION_CAP
    was_at_noise = False
    evaluation: Optional[Evaluation] = None

    for iteration in range(cfg.l_max):
        nu = cfg.nu(iteration)
        evaluator = ObjectiveEvaluator(
            data,
            replace(obj_base, nu=nu, d_floor=cfg.d_floor),
            branch,
            metrics=metrics,
        )
        try:
            result = minimize_box(evaluator, p, bounds, cfg.inner_tol, cfg.max_evals, step)
            evaluation = evaluator.evaluate(result.point(branch))
        except EvaluationFailed as exc:
            raise ReconstructionFailed(
                f"{branch.value} branch failed in outer iteration {iteration}: {exc}",
                history,
            ) from exc

        nu_next = cfg.nu(iteration + 1)
        offset = result.x - p_ref
        j_reg_next = evaluation.fit + 0.5 * nu_next * float(offset @ offset)
        move = result.x - p
        error = float(np.linalg.norm(move)) + abs(evaluation.fit - j_reg_next)
        best_fit = min(best_fit, evaluation.fit)
        record = IterationRecord(
            iteration=iteration,
            nu=nu,
            j_fit=evaluation.fit,
            j_reg=evaluation.total,
            theta=float(result.x[0]),
            d1=float(result.x[1]),
            d2=float(result.x[2]),
            branch=branch,
            error=error,
            best_fit=best_fit,
            evaluations=result.nfev,
        )
        history.append(record)
        schedule.append(nu)
        metrics.record_outer_iteration(result.nfev)
        _logger.info(
            "[%s] l=%d nu=%.1e J_fit=%.6e J_reg=%.6e E=%.3e p=(%.6f, %.4f, %.4f)%s",
            branch.value,
            iteration,
            nu,
            evaluation.fit,
            evaluation.total,
            error,
            *result.x,
            " [bound active]" if result.on_boundary else "",
        )

        normalized_move = float(np.linalg.norm(move / width))
        step = min(max(normalized_move, MIN_SIMPLEX_STEP), cfg.simplex_step)
        p = result.x
        at_noise = noise_level > 0 and evaluation.fit <= noise_level
        if error <= cfg.tol:
            stop = StopReason.TOLERANCE
            break
        if at_noise and was_at_noise:
            _logger.info(
                "[%s] J_fit=%.6e within the noise level %.6e for two iterations",
                branch.value,
                evaluation.fit,
                noise_level,
            )
            stop = StopReason.NOISE_LEVEL
            break
        was_at_noise = at_noise

    assert evaluation is not None
    return BranchRun(
        branch=branch,
        p_opt=ParamVector.from_array(p, branch),
        evaluation=evaluation,
        history=tuple(history),
        nu_schedule=tuple(schedule),
        stop=stop,
    )


def _select_run(runs: Sequence[BranchRun]) -> BranchRun:
    """
    Lowest J_fit, except that runs within a relative BRANCH_TIE_RTOL of it
    count as tied; among tied runs one whose optimum is already canonical wins.
    """
    lowest = min(run.j_fit for run in runs)
    tied = [run for run in runs if run.j_fit <= lowest * (1.0 + BRANCH_TIE_RTOL) + BRANCH_TIE_ATOL]
    return min(tied, key=lambda run: (run.reflected, run.j_fit))


def reconstruct(
    data: ExperimentSet,
    p0: ParamVector,
    cfg: ReconstructionConfig,
    obj_base: ObjectiveConfig,
    *,
    branches: Sequence[Branch] = (Branch.ROTATION, Branch.REFLECTION),
    metrics: Optional[ReconstructionMetrics] = None,
) -> ReconstructionReport:
    """
    Run the shrinking-ν loop from ``p0`` on every branch in ``branches`` and
    report the branch with the lowest final J_fit.

    A branch whose loop aborts is logged and left out; only when every branch
    aborts is :class:`ReconstructionFailed` raised, carrying all histories.
    """
    if not branches:
        raise ValueError("at least one branch is required")
    if not obj_base.bounds.contains(p0):
        raise ValueError(f"initial guess {p0} lies outside the bounds")
    metrics = metrics if metrics is not None else ReconstructionMetrics()
    _, clamped = clamp_damping(p0, cfg.d_floor)
    if clamped:
        _logger.warning(
            "initial guess has %s below d_floor=%.1e Hz; forward solves use the floor",
            "/".join(clamped),
            cfg.d_floor,
        )
    noise_level = cfg.discrepancy * noise_misfit(data)

    runs: List[BranchRun] = []
    failures: List[ReconstructionFailed] = []
    failed: List[str] = []
    for branch in branches:
        try:
            runs.append(_run_branch(data, p0.with_branch(branch), cfg, obj_base, metrics, noise_level))
        except ReconstructionFailed as exc:
            _logger.warning("%s", exc)
            failures.append(exc)
            failed.append(branch.value)
    if not runs:
        history = [record for exc in failures for record in exc.history]
        raise ReconstructionFailed("; ".join(str(exc) for exc in failures), history) from failures[-1]

    best = _select_run(runs)
    for run in runs:
        _logger.info(
            "branch %s: J_fit=%.6e after %d iterations (%s)",
            run.branch.value,
            run.j_fit,
            len(run.history),
            run.stop.value,
        )

    p_opt = canonical_point(best.p_opt)
    if p_opt != best.p_opt:
        _logger.info("reporting %s as its canonical form %s", best.p_opt, p_opt)
    start = ObjectiveEvaluator(
        data, replace(obj_base, nu=0.0, d_floor=cfg.d_floor), best.branch
    ).evaluate(p0.with_branch(best.branch))
    coupling = aggregate_coupling(p_opt.theta, p_opt.branch, data.hybrids)
    return ReconstructionReport(
        p_opt=p_opt,
        p_fit=best.p_opt,
        p0=p0,
        p_ref=obj_base.p_ref,
        chi=best.evaluation.chi,
        j_fit=best.j_fit,
        coupling=coupling,
        deviations=DeviationSummary(
            initial=start.deviations, final=best.evaluation.deviations
        ),
        nu_schedule=best.nu_schedule,
        history=best.history,
        branch_fits={run.branch.value: run.j_fit for run in runs},
        converged=best.converged,
        stop=best.stop,
        noise_level=noise_level,
        failed_branches=tuple(failed),
        metrics=metrics.summary(),
    )


def solve_fixed_nu(
    data: ExperimentSet,
    p0: ParamVector,
    nu: float,
    obj_base: ObjectiveConfig,
    cfg: ReconstructionConfig = ReconstructionConfig(),
    *,
    branches: Sequence[Branch] = (Branch.ROTATION, Branch.REFLECTION),
    metrics: Optional[ReconstructionMetrics] = None,
) -> ReconstructionReport:
    """A single box-constrained solve at a fixed weight ν."""
    single = replace(cfg, nu0=nu, l_max=1, tol=math.inf)
    return reconstruct(data, p0, single, obj_base, branches=branches, metrics=metrics)


__all__ = [
    "ReconstructionConfig",
    "IterationRecord",
    "Spread",
    "CouplingSummary",
    "DeviationSummary",
    "ReconstructionReport",
    "StopReason",
    "aggregate_coupling",
    "reconstruct",
    "solve_fixed_nu",
]
