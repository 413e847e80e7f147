# File: common/oscillator/matrix.py
"""
Small 2x2 linear-algebra helpers shared by the model and forward layers.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from ..shared.errors import NotOrthogonal

ORTHOGONALITY_ATOL = 1e-9


def orthogonality_defect(T: np.ndarray) -> float:
    """Max-norm of TᵀT − I."""
    T = np.asarray(T, dtype=float)
    return float(np.max(np.abs(T.T @ T - np.eye(2))))


def require_orthogonal(T: np.ndarray, atol: float = ORTHOGONALITY_ATOL) -> np.ndarray:
    """Return ``T`` as a float array or raise ``NotOrthogonal``."""
    T = np.asarray(T, dtype=float)
    if T.shape != (2, 2):
        raise NotOrthogonal(f"expected a 2x2 matrix, got shape {T.shape}")
    defect = orthogonality_defect(T)
    if defect > atol:
        raise NotOrthogonal(f"|TᵀT - I|_max = {defect:.3e} exceeds {atol:.1e}")
    return T


def symmetric_eigen(C: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and column eigenvectors of a symmetric 2x2 matrix."""
    values, vectors = np.linalg.eigh(np.asarray(C, dtype=float))
    return values, vectors


def solve_2x2(M: np.ndarray, rhs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Solve a stack of 2x2 (complex) systems ``M[k] x[k] = rhs[k]`` by Cramer's rule.

    Parameters
    ----------
    M:
        Array of shape ``(n, 2, 2)``.
    rhs:
        Array of shape ``(n, 2)``.

    Returns
    -------
    (x, det):
        Solutions of shape ``(n, 2)`` and the determinants of shape ``(n,)``.
        Rows with a zero determinant come back as ``nan``; callers decide
        whether that is an error.
    """
    M = np.asarray(M)
    rhs = np.asarray(rhs)
    a, b = M[:, 0, 0], M[:, 0, 1]
    c, d = M[:, 1, 0], M[:, 1, 1]
    det = a * d - b * c
    with np.errstate(divide="ignore", invalid="ignore"):
        x0 = (rhs[:, 0] * d - b * rhs[:, 1]) / det
        x1 = (a * rhs[:, 1] - c * rhs[:, 0]) / det
    return np.stack([x0, x1], axis=1), det


def determinant_scale(M: np.ndarray) -> np.ndarray:
    """Magnitude against which a 2x2 determinant is judged to be zero."""
    M = np.asarray(M)
    return np.maximum(
        np.abs(M[:, 0, 0]) * np.abs(M[:, 1, 1]),
        np.abs(M[:, 0, 1]) * np.abs(M[:, 1, 0]),
    )


__all__ = [
    "ORTHOGONALITY_ATOL",
    "orthogonality_defect",
    "require_orthogonal",
    "symmetric_eigen",
    "solve_2x2",
    "determinant_scale",
]
