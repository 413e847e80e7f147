"""
Coupled two-mode oscillator model: coefficient matrices, the orthogonal
transformation between physical and hybridized coordinates, and the closed-form
eigenvalue and extraction formulas.

Frequencies and dampings are carried in Hz everywhere; the factor 2π is applied
only when a matrix is assembled, so damping matrices are in rad/s and stiffness
matrices in (rad/s)².
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from ..shared.errors import NegativeDiagonal, NonPositiveFrequency, NonPositiveQ
from .matrix import require_orthogonal, symmetric_eigen

TWO_PI = 2.0 * math.pi

Matrix2 = np.ndarray


class Branch(str, Enum):
    """The two connected components of O(2)."""

    ROTATION = "rotation"
    REFLECTION = "reflection"


@dataclass(frozen=True)
class PhysicalParams:
    """Untransformed model coefficients, all in Hz."""

    f1: float
    f2: float
    coupling: float
    d1: float = 0.0
    d2: float = 0.0

    def __post_init__(self) -> None:
        if not (self.f1 > 0 and self.f2 > 0):
            raise ValueError(f"frequencies must be positive, got {self.f1}, {self.f2}")
        if self.coupling < 0:
            raise ValueError(f"coupling must be non-negative, got {self.coupling}")
        if self.d1 < 0 or self.d2 < 0:
            raise ValueError(f"dampings must be non-negative, got {self.d1}, {self.d2}")


@dataclass(frozen=True)
class ParamVector:
    """Optimization unknowns p = (θ, d1, d2) plus the O(2) branch they live on."""

    theta: float
    d1: float
    d2: float
    branch: Branch = Branch.ROTATION

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.d1, self.d2], dtype=float)

    @classmethod
    def from_array(
        cls, values: Sequence[float], branch: Branch = Branch.ROTATION
    ) -> "ParamVector":
        theta, d1, d2 = (float(v) for v in values)
        return cls(theta=theta, d1=d1, d2=d2, branch=Branch(branch))

    def with_branch(self, branch: Branch) -> "ParamVector":
        return ParamVector(self.theta, self.d1, self.d2, Branch(branch))

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "d1_Hz": self.d1,
            "d2_Hz": self.d2,
            "branch": self.branch.value,
        }


@dataclass(frozen=True)
class HybridStiffness:
    """Hybridized eigenfrequencies η+ ≤ η− in Hz (diagonal of the hybrid stiffness)."""

    eta_plus: float
    eta_minus: float

    def __post_init__(self) -> None:
        if not (0 < self.eta_plus <= self.eta_minus):
            raise ValueError(
                f"expected 0 < eta_plus <= eta_minus, got {self.eta_plus}, {self.eta_minus}"
            )

    def matrix(self) -> Matrix2:
        """diag((2πη+)², (2πη−)²)."""
        return np.diag([(TWO_PI * self.eta_plus) ** 2, (TWO_PI * self.eta_minus) ** 2])


@dataclass(frozen=True)
class Bounds:
    """Admissible box p_min ≤ p ≤ p_max (componentwise)."""

    p_min: Tuple[float, ...]
    p_max: Tuple[float, ...]

    def __post_init__(self) -> None:
        lower = tuple(float(v) for v in self.p_min)
        upper = tuple(float(v) for v in self.p_max)
        if len(lower) != len(upper):
            raise ValueError("p_min and p_max must have the same length")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise ValueError(f"p_min {lower} exceeds p_max {upper}")
        object.__setattr__(self, "p_min", lower)
        object.__setattr__(self, "p_max", upper)

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.p_min)

    @property
    def upper(self) -> np.ndarray:
        return np.array(self.p_max)

    def contains(self, point: Sequence[float] | ParamVector, atol: float = 0.0) -> bool:
        x = point.as_array() if isinstance(point, ParamVector) else np.asarray(point)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def clip(self, point: Sequence[float]) -> np.ndarray:
        return np.clip(np.asarray(point, dtype=float), self.lower, self.upper)


def default_bounds(d_span_hz: float = 1000.0) -> Bounds:
    """θ ∈ [−2π, 2π], d1, d2 ∈ [−d_span, d_span] Hz."""
    return Bounds(
        p_min=(-TWO_PI, -d_span_hz, -d_span_hz),
        p_max=(TWO_PI, d_span_hz, d_span_hz),
    )


def stiffness_from_physical(params: PhysicalParams) -> Matrix2:
    """𝒞 = [[(2πf1)², −(2πλ)²], [−(2πλ)², (2πf2)²]]."""
    k12 = -((TWO_PI * params.coupling) ** 2)
    return np.array(
        [
            [(TWO_PI * params.f1) ** 2, k12],
            [k12, (TWO_PI * params.f2) ** 2],
        ]
    )


def hybrid_eigenvalues(f1: float, f2: float, coupling: float) -> HybridStiffness:
    """
    Hybridized eigenfrequencies of the coupled stiffness matrix.

    The closed form gives the angular eigenvalues (2πη±)²; the common factor
    (2π)² cancels, so it is evaluated directly in Hz:
    η±² = (f1² + f2²)/2 ∓ sqrt((f1² − f2²)²/4 + λ⁴).
    """
    if not (f1 > 0 and f2 > 0):
        raise NonPositiveFrequency(f"f1, f2 must be positive, got {f1}, {f2}")
    mean_sq = 0.5 * (f1 * f1 + f2 * f2)
    root = math.hypot(0.5 * (f1 * f1 - f2 * f2), coupling * coupling)
    plus_sq = mean_sq - root
    minus_sq = mean_sq + root
    if plus_sq <= 0:
        raise NonPositiveFrequency(
            f"coupling {coupling} Hz too large for f1={f1}, f2={f2}: η+² = {plus_sq}"
        )
    return HybridStiffness(math.sqrt(plus_sq), math.sqrt(minus_sq))


def rotation_from_theta(theta: float, branch: Branch = Branch.ROTATION) -> Matrix2:
    c, s = math.cos(theta), math.sin(theta)
    if Branch(branch) is Branch.ROTATION:
        return np.array([[c, -s], [s, c]])
    return np.array([[-c, s], [s, c]])


def canonical_point(p: ParamVector) -> ParamVector:
    """
    The representative of ``p`` whose transformation gives a non-positive
    off-diagonal stiffness.

    θ and θ + π produce the same matrices on either branch, and the rotation at
    θ produces the same 𝒟̃ as the reflection at π − θ while flipping the sign
    of the off-diagonal of Tᵀ𝒞̃T. The returned θ lies in [0, π); for
    θ ∈ (0, π/2) it is mapped to π − θ on the other branch. Dampings are kept.
    """
    theta = math.fmod(p.theta, math.pi)
    if theta < 0:
        theta += math.pi
    branch = p.branch
    if 0.0 < theta < 0.5 * math.pi:
        theta = math.pi - theta
        branch = Branch.REFLECTION if branch is Branch.ROTATION else Branch.ROTATION
    # π − tiny and −tiny + π round to π
    if theta >= math.pi:
        theta -= math.pi
    return ParamVector(theta, p.d1, p.d2, branch)


def physical_stiffness_from_hybrid(T: Matrix2, hybrid: HybridStiffness) -> Matrix2:
    """𝒞 = Tᵀ 𝒞̃ T."""
    T = require_orthogonal(T)
    C = T.T @ hybrid.matrix() @ T
    return 0.5 * (C + C.T)


def extract_physical(C: Matrix2) -> Tuple[float, float, float, int]:
    """
    Read (f1, f2, λ) off a physical stiffness matrix.

    ``coupling_sign`` is +1 when the off-diagonal is negative, which is the
    −(2πλ)² convention of the model; reflected or rotated θ values may
    legitimately produce the other sign, so it is reported rather than raised.
    """
    C = np.asarray(C, dtype=float)
    c11, c22, c12 = C[0, 0], C[1, 1], 0.5 * (C[0, 1] + C[1, 0])
    if c11 <= 0 or c22 <= 0:
        raise NegativeDiagonal(f"stiffness diagonal must be positive, got {c11}, {c22}")
    f1 = math.sqrt(c11) / TWO_PI
    f2 = math.sqrt(c22) / TWO_PI
    coupling = math.sqrt(abs(c12)) / TWO_PI
    coupling_sign = -1 if c12 > 0 else 1
    return f1, f2, coupling, coupling_sign


def hybrid_damping(T: Matrix2, d1: float, d2: float) -> Matrix2:
    """𝒟̃ = T diag(2πd1, 2πd2) Tᵀ (rad/s)."""
    T = require_orthogonal(T)
    D = T @ np.diag([TWO_PI * d1, TWO_PI * d2]) @ T.T
    return 0.5 * (D + D.T)


def damping_reference(
    eta_plus: float, eta_minus: float, q_plus: float, q_minus: float
) -> Tuple[float, float]:
    """Reference dampings d± = η±/Q± in Hz."""
    if not (q_plus > 0 and q_minus > 0):
        raise NonPositiveQ(f"quality factors must be positive, got {q_plus}, {q_minus}")
    return eta_plus / q_plus, eta_minus / q_minus


def eigen_transform(C: Matrix2) -> Matrix2:
    """
    Transformation assembled from the eigenvectors of ``C`` (rows = eigenvectors,
    ascending eigenvalue order). Only used to cross-check the θ parameterization.
    """
    _, vectors = symmetric_eigen(C)
    return vectors.T


__all__ = [
    "TWO_PI",
    "Matrix2",
    "Branch",
    "PhysicalParams",
    "ParamVector",
    "HybridStiffness",
    "Bounds",
    "default_bounds",
    "stiffness_from_physical",
    "hybrid_eigenvalues",
    "rotation_from_theta",
    "canonical_point",
    "physical_stiffness_from_hybrid",
    "extract_physical",
    "hybrid_damping",
    "damping_reference",
    "eigen_transform",
]
