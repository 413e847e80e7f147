"""
Metrics collection helpers for objective evaluation and reconstruction runs.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from statistics import fmean
from typing import Dict, Iterable, List


@dataclass
class ReconstructionMetrics:
    """Track statistics for objective evaluations and outer iterations."""

    evaluations: int = 0
    evaluation_durations: List[float] = field(default_factory=list)
    clamp_events: Counter[str] = field(default_factory=Counter)
    clamped_evaluations: int = 0
    failures: Counter[str] = field(default_factory=Counter)
    outer_iterations: int = 0
    inner_evaluations: List[int] = field(default_factory=list)

    def record_evaluation(self, duration: float, clamped: Iterable[str] = ()) -> None:
        """Record one objective evaluation and the damping components it clamped."""
        self.evaluations += 1
        self.evaluation_durations.append(duration)
        names = list(clamped)
        if names:
            self.clamped_evaluations += 1
            self.clamp_events.update(names)

    def record_failure(self, reason: str) -> None:
        """Record an evaluation that raised (e.g. singular dynamic stiffness)."""
        self.failures[reason] += 1

    def record_outer_iteration(self, inner_evaluations: int) -> None:
        """Record a completed outer iteration with its inner solver budget use."""
        self.outer_iterations += 1
        self.inner_evaluations.append(inner_evaluations)

    def merge(self, other: "ReconstructionMetrics") -> None:
        """Merge another metrics object into this one."""
        self.evaluations += other.evaluations
        self.evaluation_durations.extend(other.evaluation_durations)
        self.clamp_events.update(other.clamp_events)
        self.clamped_evaluations += other.clamped_evaluations
        self.failures.update(other.failures)
        self.outer_iterations += other.outer_iterations
        self.inner_evaluations.extend(other.inner_evaluations)

    def summary(self) -> Dict[str, object]:
        """Deterministic counters, safe to embed in reports."""
        return {
            "evaluations": self.evaluations,
            "clamped_evaluations": self.clamped_evaluations,
            "clamp_events": dict(sorted(self.clamp_events.items())),
            "failures": dict(sorted(self.failures.items())),
            "outer_iterations": self.outer_iterations,
            "inner_evaluations": list(self.inner_evaluations),
        }

    def timing_summary(self) -> Dict[str, float]:
        """Wall-clock statistics; not deterministic, so kept out of reports."""
        durations = self.evaluation_durations
        return {
            "total_evaluation_time": float(sum(durations)),
            "average_evaluation_time": fmean(durations) if durations else 0.0,
        }


__all__ = ["ReconstructionMetrics"]
