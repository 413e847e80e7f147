"""
Deviation metric and the Tikhonov-regularized objective.

J(p) = Σ_m Σ_k |χ_p·z_p(u_k^m) − z*_k^m| / z*_k^m + (ν/2)‖p − p_ref‖²

χ_p is recomputed from the FRF sweep at every p. Dampings are clamped to
``d_floor`` before any forward solve; the regularizer always sees the raw p.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from time import perf_counter
from typing import Optional, Tuple

import numpy as np

from common.experiment.experiment import ExperimentSet
from common.experiment.io import References
from common.oscillator.calibration import scaling_factor
from common.oscillator.forward import steady_peak_amplitudes
from common.oscillator.model import Bounds, Branch, ParamVector
from common.shared.errors import ZeroLabAmplitude
from common.shared.metrics import ReconstructionMetrics

_logger = logging.getLogger(__name__)

D_FLOOR_DEFAULT = 1e-6


@dataclass(frozen=True)
class ObjectiveConfig:
    """Regularization weight ν, reference point and admissible box."""

    nu: float
    p_ref: ParamVector
    bounds: Bounds
    d_floor: float = D_FLOOR_DEFAULT

    def __post_init__(self) -> None:
        if not self.nu >= 0:
            raise ValueError(f"nu must be non-negative, got {self.nu}")
        if not self.d_floor > 0:
            raise ValueError(f"d_floor must be positive, got {self.d_floor}")
        if not self.bounds.contains(self.p_ref):
            raise ValueError(f"reference point {self.p_ref} lies outside the bounds")

    def with_nu(self, nu: float) -> "ObjectiveConfig":
        return replace(self, nu=nu)


@dataclass(frozen=True)
class Evaluation:
    """Everything one objective evaluation computed."""

    p: ParamVector
    chi: float
    deviations: np.ndarray
    regularization: float
    clamped: Tuple[str, ...] = ()

    @property
    def fit(self) -> float:
        return float(np.sum(self.deviations))

    @property
    def total(self) -> float:
        return self.fit + self.regularization


def reference_point(data: ExperimentSet, references: Optional[References] = None) -> ParamVector:
    """p_ref = (θ_ref, d1_ref, d2_ref); missing dampings are η±/Q± of the first pair."""
    references = references or References()
    d_plus, d_minus = data.damping_reference()
    return ParamVector(
        theta=references.theta,
        d1=d_plus if references.d1 is None else references.d1,
        d2=d_minus if references.d2 is None else references.d2,
    )


def relative_deviation(z_sim: float, z_lab: float) -> float:
    """|z_sim − z_lab| / z_lab."""
    if not z_lab > 0:
        raise ZeroLabAmplitude(f"lab amplitude must be positive, got {z_lab!r}")
    return abs(z_sim - z_lab) / z_lab


def clamp_damping(p: ParamVector, d_floor: float) -> Tuple[ParamVector, Tuple[str, ...]]:
    """Raise d1, d2 to at least ``d_floor``; also returns the names of clamped components."""
    clamped = tuple(name for name, d in (("d1", p.d1), ("d2", p.d2)) if d < d_floor)
    if not clamped:
        return p, ()
    return replace(p, d1=max(p.d1, d_floor), d2=max(p.d2, d_floor)), clamped


def simulated_peaks(p: ParamVector, data: ExperimentSet) -> np.ndarray:
    """z_p at (u1, u2) of every pair on the observed channel, shape ``(n_c, 2)``."""
    return np.array(
        [
            steady_peak_amplitudes(p, hybrid, pair, data.channel)
            for pair, hybrid in zip(data.pairs, data.hybrids)
        ]
    )


def model_scaling(p: ParamVector, data: ExperimentSet) -> float:
    """
    χ_p against the experiment's FRF sweep above its noise floor, simulated at
    the drift start on the sweep grid.
    """
    return scaling_factor(p, data.frf.above_floor(), data.frf_hybrid, data.frf.frequencies, data.channel)


def deviation_vector(p: ParamVector, chi: float, data: ExperimentSet) -> np.ndarray:
    """
    Relative deviations of χ·z_p against the lab peaks, length 2·n_c, ordered
    pair-major with u1 before u2.
    """
    lab = data.lab_peaks.reshape(-1)
    bad = np.flatnonzero(~(lab > 0))
    if bad.size:
        m, k = divmod(int(bad[0]), 2)
        raise ZeroLabAmplitude(
            f"lab peak of pair {m + 1} at u{k + 1} is {lab[bad[0]]!r}; it must be positive"
        )
    sim = chi * simulated_peaks(p, data).reshape(-1)
    return np.abs(sim - lab) / lab


def noise_misfit(data: ExperimentSet) -> float:
    """
    J_fit expected from the noise alone: a peak read above the floor ξ is off
    by ξ/2 on average, so the sum runs over (ξ/2)/z* for the positive peaks.
    Zero for noiseless data.
    """
    xi = data.xi
    if xi == 0:
        return 0.0
    lab = data.lab_peaks.reshape(-1)
    return float(np.sum(0.5 * xi / lab[lab > 0]))


class ObjectiveEvaluator:
    """
    Callable objective over raw ``(θ, d1, d2)`` arrays on a fixed branch, for
    the box minimizer.
    """

    def __init__(
        self,
        data: ExperimentSet,
        config: ObjectiveConfig,
        branch: Branch = Branch.ROTATION,
        *,
        metrics: Optional[ReconstructionMetrics] = None,
    ):
        self.data = data
        self.config = config
        self.branch = Branch(branch)
        self.metrics = metrics
        self._p_ref = config.p_ref.as_array()

    def evaluate(self, p: ParamVector) -> Evaluation:
        start = perf_counter()
        try:
            effective, clamped = clamp_damping(p, self.config.d_floor)
            chi = model_scaling(effective, self.data)
            deviations = deviation_vector(effective, chi, self.data)
        except Exception as exc:
            if self.metrics:
                self.metrics.record_failure(type(exc).__name__)
            raise
        offset = p.as_array() - self._p_ref
        regularization = 0.5 * self.config.nu * float(offset @ offset)
        if self.metrics:
            self.metrics.record_evaluation(perf_counter() - start, clamped)
        if clamped:
            _logger.debug("clamped %s to %.1e Hz at p=%s", ",".join(clamped), self.config.d_floor, p)
        return Evaluation(
            p=p,
            chi=chi,
            deviations=deviations,
            regularization=regularization,
            clamped=clamped,
        )

    def __call__(self, x: np.ndarray) -> float:
        return self.evaluate(ParamVector.from_array(x, self.branch)).total


def objective(p: ParamVector, data: ExperimentSet, cfg: ObjectiveConfig) -> float:
    """J(p) for one parameter vector."""
    return ObjectiveEvaluator(data, cfg, p.branch).evaluate(p).total


__all__ = [
    "D_FLOOR_DEFAULT",
    "ObjectiveConfig",
    "Evaluation",
    "reference_point",
    "relative_deviation",
    "clamp_damping",
    "simulated_peaks",
    "model_scaling",
    "deviation_vector",
    "noise_misfit",
    "ObjectiveEvaluator",
    "objective",
]
