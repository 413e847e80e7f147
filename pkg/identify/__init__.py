# File: identify/__init__.py

from .minimize import BoxMinimum, minimize_box
from .objective import (
    Evaluation,
    ObjectiveConfig,
    ObjectiveEvaluator,
    deviation_vector,
    model_scaling,
    noise_misfit,
    objective,
    reference_point,
    relative_deviation,
)
from .reconstruct import (
    CouplingSummary,
    DeviationSummary,
    IterationRecord,
    ReconstructionConfig,
    ReconstructionReport,
    StopReason,
    aggregate_coupling,
    reconstruct,
    solve_fixed_nu,
)

__all__ = [
    "BoxMinimum",
    "CouplingSummary",
    "DeviationSummary",
    "Evaluation",
    "IterationRecord",
    "ObjectiveConfig",
    "ObjectiveEvaluator",
    "ReconstructionConfig",
    "ReconstructionReport",
    "StopReason",
    "aggregate_coupling",
    "deviation_vector",
    "minimize_box",
    "model_scaling",
    "noise_misfit",
    "objective",
    "reconstruct",
    "reference_point",
    "relative_deviation",
    "solve_fixed_nu",
]
