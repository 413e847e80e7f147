"""
Exception hierarchy shared by the model, forward, calibration, identification
and data layers.
"""

from __future__ import annotations

from typing import Optional, Sequence


class ModeCoupleError(Exception):
    """Base class for every error raised by this package."""


# model ----------------------------------------------------------------------


class ModelError(ModeCoupleError, ValueError):
    """Invalid input to a closed-form model operation."""


class NonPositiveFrequency(ModelError):
    """A squared hybrid eigenfrequency is not positive (unphysical coupling)."""


class NotOrthogonal(ModelError):
    """A transformation matrix deviates from orthogonality."""


class NegativeDiagonal(ModelError):
    """A stiffness matrix has a non-positive diagonal entry."""


class NonPositiveQ(ModelError):
    """A quality factor is zero or negative."""


# forward --------------------------------------------------------------------


class ForwardError(ModeCoupleError, ArithmeticError):
    """Failure while computing the system response."""


class SingularAtDrive(ForwardError):
    """The dynamic stiffness matrix is singular at the drive frequency."""

    def __init__(self, frequency_hz: float, det: complex):
        super().__init__(
            f"dynamic stiffness singular at {frequency_hz!r} Hz (|det|={abs(det):.3e}); "
            "clamp the damping before solving"
        )
        self.frequency_hz = frequency_hz
        self.det = det


class StepTooLarge(ForwardError):
    """The integrator step does not resolve the fastest frequency."""


class EmptyWindow(ForwardError):
    """A sampling or search window contains no points."""


# calibration ----------------------------------------------------------------


class CalibrationError(ModeCoupleError):
    """FRF calibration failed."""


class NoPeak(CalibrationError):
    """The sweep maximum does not rise above three times the noise floor."""


class FitDiverged(CalibrationError):
    """The Lorentzian fit ended with a larger residual than it started with."""


class ZeroMaximum(CalibrationError):
    """A lab or simulated FRF has no positive maximum."""


# identification -------------------------------------------------------------


class IdentificationError(ModeCoupleError):
    """Objective evaluation or reconstruction failed."""


class ZeroLabAmplitude(IdentificationError, ValueError):
    """A lab peak amplitude used as a deviation denominator is not positive."""


class EvaluationFailed(IdentificationError):
    """The objective raised for a specific parameter vector."""

    def __init__(self, point: Sequence[float], cause: BaseException):
        super().__init__(f"objective evaluation failed at p={list(point)!r}: {cause}")
        self.point = tuple(float(x) for x in point)
        self.cause = cause


class ReconstructionFailed(IdentificationError):
    """The outer loop aborted; ``history`` holds the iterations completed so far."""

    def __init__(self, message: str, history: Optional[list] = None):
        super().__init__(message)
        self.history = list(history or [])


# data -----------------------------------------------------------------------


class DataError(ModeCoupleError, ValueError):
    """Experiment files or configuration do not conform to the schema."""


class SchemaError(DataError):
    """Schema violation, located by file, line and column when known."""

    def __init__(
        self,
        message: str,
        *,
        file: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[str] = None,
    ):
        where = []
        if file is not None:
            where.append(str(file))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.file = file
        self.line = line
        self.column = column


class UnitError(DataError):
    """A configuration key carries an unknown or wrong-family unit tag."""

    def __init__(self, key: str, tag: str, expected: str):
        super().__init__(f"key {key!r}: unit tag {tag!r} is not a {expected} unit")
        self.key = key
        self.tag = tag


__all__ = [
    "ModeCoupleError",
    "ModelError",
    "NonPositiveFrequency",
    "NotOrthogonal",
    "NegativeDiagonal",
    "NonPositiveQ",
    "ForwardError",
    "SingularAtDrive",
    "StepTooLarge",
    "EmptyWindow",
    "CalibrationError",
    "NoPeak",
    "FitDiverged",
    "ZeroMaximum",
    "IdentificationError",
    "ZeroLabAmplitude",
    "EvaluationFailed",
    "ReconstructionFailed",
    "DataError",
    "SchemaError",
    "UnitError",
]
