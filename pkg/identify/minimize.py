"""
Box-constrained derivative-free local minimizer.

Nelder–Mead (scipy) run in coordinates normalized to the unit box, with an
explicit initial simplex anchored at the start point. Vertices that leave the
box are projected back by scipy's bound handling.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from common.oscillator.model import Bounds, ParamVector
from common.shared.errors import EvaluationFailed

_logger = logging.getLogger(__name__)

MAX_EVALS_DEFAULT = 500
ACTIVE_ATOL = 1e-9


@dataclass(frozen=True)
class BoxMinimum:
    """
    Result of :func:`minimize_box`.

    ``active`` holds ``"lower"``, ``"upper"`` or ``None`` per coordinate;
    ``trace`` is the best-so-far objective after every evaluation.
    """

    x: np.ndarray
    fun: float
    nfev: int
    active: Tuple[Optional[str], ...]
    trace: np.ndarray
    converged: bool

    @property
    def on_boundary(self) -> bool:
        return any(flag is not None for flag in self.active)

    def point(self, branch) -> ParamVector:
        return ParamVector.from_array(self.x, branch)


def _initial_simplex(z0: np.ndarray, step: float) -> np.ndarray:
    n = z0.size
    simplex = np.tile(z0, (n + 1, 1))
    for i in range(n):
        delta = step if z0[i] + step <= 1.0 else -step
        simplex[i + 1, i] = z0[i] + delta
    return simplex


def minimize_box(
    f: Callable[[np.ndarray], float],
    p0: Sequence[float] | ParamVector,
    bounds: Bounds,
    inner_tol: float = 1e-8,
    max_evals: int = MAX_EVALS_DEFAULT,
    simplex_step: float = 0.1,
) -> BoxMinimum:
    """
    Minimize ``f`` over the box starting from ``p0``.

    Terminates when the normalized simplex diameter drops below ``inner_tol``
    or after ``max_evals`` evaluations. The returned point is the best one
    evaluated, so ``f(x) <= f(p0)`` always holds. Exceptions raised by ``f``
    surface as :class:`EvaluationFailed` carrying the failing point.
    """
    x0 = p0.as_array() if isinstance(p0, ParamVector) else np.asarray(p0, dtype=float)
    if not bounds.contains(x0, atol=1e-12):
        raise ValueError(f"start point {x0.tolist()} lies outside the bounds")
    x0 = bounds.clip(x0)
    if not 0 < simplex_step <= 0.5:
        raise ValueError(f"simplex_step must lie in (0, 0.5], got {simplex_step}")

    lower, upper = bounds.lower, bounds.upper
    if np.any(upper <= lower):
        raise ValueError(f"bounds must have positive width in every coordinate, got {bounds}")
    width = upper - lower

    def to_box(z: np.ndarray) -> np.ndarray:
        return lower + np.clip(z, 0.0, 1.0) * width

    z0 = np.clip((x0 - lower) / width, 0.0, 1.0)
    best_x = x0.copy()
    best_f = math.inf
    trace: List[float] = []

    def call(x: np.ndarray) -> float:
        nonlocal best_x, best_f
        try:
            value = float(f(x))
        except EvaluationFailed:
            raise
        except Exception as exc:
            raise EvaluationFailed(x, exc) from exc
        if math.isnan(value):
            raise EvaluationFailed(x, ArithmeticError("objective returned NaN"))
        if value < best_f:
            best_f, best_x = value, x
        trace.append(best_f)
        return value

    call(x0.copy())
    result = minimize(
        lambda z: call(to_box(z)),
        z0,
        method="Nelder-Mead",
        bounds=[(0.0, 1.0)] * z0.size,
        options={
            "initial_simplex": _initial_simplex(z0, simplex_step),
            "xatol": inner_tol,
            "fatol": np.inf,
            "maxfev": max_evals,
            "adaptive": False,
        },
    )

    z_best = (best_x - lower) / width
    active: List[Optional[str]] = []
    for z in z_best:
        if z <= ACTIVE_ATOL:
            active.append("lower")
        elif z >= 1.0 - ACTIVE_ATOL:
            active.append("upper")
        else:
            active.append(None)

    _logger.debug(
        "Nelder-Mead: %s after %d evaluations, f=%.6e",
        result.message,
        len(trace),
        best_f,
    )
    return BoxMinimum(
        x=np.array(best_x),
        fun=best_f,
        nfev=len(trace),
        active=tuple(active),
        trace=np.array(trace),
        converged=bool(result.success),
    )


__all__ = ["MAX_EVALS_DEFAULT", "BoxMinimum", "minimize_box"]
