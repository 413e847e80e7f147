"""
Model algebra: eigenvalue formula, transformation branches, extraction and the
value types.
"""
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from common.experiment.scenarios import REFERENCE_COEFFICIENTS, TRUTH_THETA
from common.oscillator.matrix import orthogonality_defect
from common.oscillator.model import (
    TWO_PI,
    Bounds,
    Branch,
    HybridStiffness,
    ParamVector,
    PhysicalParams,
    canonical_point,
    damping_reference,
    default_bounds,
    eigen_transform,
    extract_physical,
    hybrid_damping,
    hybrid_eigenvalues,
    physical_stiffness_from_hybrid,
    rotation_from_theta,
    stiffness_from_physical,
)
from common.shared.errors import NegativeDiagonal, NonPositiveFrequency, NonPositiveQ

MHZ = 1e6
frequencies = st.floats(min_value=1 * MHZ, max_value=10 * MHZ)
couplings = st.floats(min_value=0.0, max_value=1 * MHZ)
angles = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi)
branches = st.sampled_from(list(Branch))


@settings(max_examples=1000, deadline=None)
@given(f1=frequencies, f2=frequencies, coupling=couplings)
def test_closed_form_eigenvalues_match_numeric(f1, f2, coupling):
    assume(coupling**2 < 0.5 * f1 * f2)
    hybrid = hybrid_eigenvalues(f1, f2, coupling)
    numeric = np.linalg.eigvalsh(stiffness_from_physical(PhysicalParams(f1, f2, coupling)))
    np.testing.assert_allclose(
        [(TWO_PI * hybrid.eta_plus) ** 2, (TWO_PI * hybrid.eta_minus) ** 2],
        numeric,
        rtol=1e-10,
    )


def test_reference_coefficients_land_in_drive_bands():
    hybrid = hybrid_eigenvalues(
        REFERENCE_COEFFICIENTS.f1, REFERENCE_COEFFICIENTS.f2, REFERENCE_COEFFICIENTS.coupling
    )
    assert abs(hybrid.eta_plus - 6.9402e6) < 500.0
    assert abs(hybrid.eta_minus - 7.0275e6) < 500.0


def test_zero_coupling_keeps_frequencies():
    hybrid = hybrid_eigenvalues(7e6, 6e6, 0.0)
    assert hybrid.eta_plus == pytest.approx(6e6, rel=1e-15)
    assert hybrid.eta_minus == pytest.approx(7e6, rel=1e-15)


def test_excessive_coupling_is_rejected():
    with pytest.raises(NonPositiveFrequency):
        hybrid_eigenvalues(1e6, 1e6, 1.5e6)
    with pytest.raises(NonPositiveFrequency):
        hybrid_eigenvalues(0.0, 1e6, 0.0)


@given(theta=angles, branch=branches)
def test_transformation_is_orthogonal_with_branch_determinant(theta, branch):
    T = rotation_from_theta(theta, branch)
    assert orthogonality_defect(T) < 1e-12
    expected = 1.0 if branch is Branch.ROTATION else -1.0
    assert np.linalg.det(T) == pytest.approx(expected, abs=1e-12)


@settings(deadline=None)
@given(
    theta=angles,
    branch=branches,
    eta_plus=st.floats(min_value=1 * MHZ, max_value=7 * MHZ),
    gap=st.floats(min_value=0.0, max_value=3 * MHZ),
)
def test_physical_stiffness_preserves_eigenvalues(theta, branch, eta_plus, gap):
    hybrid = HybridStiffness(eta_plus, eta_plus + gap)
    C = physical_stiffness_from_hybrid(rotation_from_theta(theta, branch), hybrid)
    np.testing.assert_allclose(C, C.T)
    np.testing.assert_allclose(
        np.linalg.eigvalsh(C), np.diag(hybrid.matrix()), rtol=1e-10
    )


@given(theta=angles)
def test_branches_extract_identical_coefficients(theta):
    hybrid = HybridStiffness(6.94e6, 7.03e6)
    rot = extract_physical(physical_stiffness_from_hybrid(rotation_from_theta(theta), hybrid))
    ref = extract_physical(
        physical_stiffness_from_hybrid(rotation_from_theta(theta, Branch.REFLECTION), hybrid)
    )
    np.testing.assert_allclose(rot[:3], ref[:3], rtol=1e-9, atol=1.0)
    if rot[2] > 1e3:
        assert rot[3] == ref[3]


def test_extraction_recovers_physical_coefficients():
    params = PhysicalParams(6.9522e6, 7.0156e6, 0.6474e6)
    f1, f2, coupling, sign = extract_physical(stiffness_from_physical(params))
    assert (f1, f2, coupling) == pytest.approx((params.f1, params.f2, params.coupling), rel=1e-12)
    assert sign == 1


def test_eigen_transform_diagonalizes_stiffness():
    C = stiffness_from_physical(PhysicalParams(6.9522e6, 7.0156e6, 0.6474e6))
    T = eigen_transform(C)
    hybrid = T @ C @ T.T
    assert abs(hybrid[0, 1]) < 1e-6 * hybrid[0, 0]
    assert hybrid[0, 0] < hybrid[1, 1]


def test_optimal_angle_gives_coupling_of_expected_magnitude():
    hybrid = hybrid_eigenvalues(
        REFERENCE_COEFFICIENTS.f1, REFERENCE_COEFFICIENTS.f2, REFERENCE_COEFFICIENTS.coupling
    )
    _, _, coupling, _ = extract_physical(
        physical_stiffness_from_hybrid(rotation_from_theta(TRUTH_THETA), hybrid)
    )
    assert 0.6e6 < coupling < 0.7e6


def test_positive_off_diagonal_is_reported_not_raised():
    C = np.array([[4.0, 1.0], [1.0, 9.0]])
    *_, sign = extract_physical(C)
    assert sign == -1


def test_negative_diagonal_raises():
    with pytest.raises(NegativeDiagonal):
        extract_physical(np.array([[-1.0, 0.0], [0.0, 1.0]]))


def test_hybrid_damping_diagonal_mixes_dampings():
    theta = 1.9
    D = hybrid_damping(rotation_from_theta(theta), 20.0, 120.0)
    c, s = math.cos(theta), math.sin(theta)
    assert D[0, 0] == pytest.approx(TWO_PI * (c * c * 20.0 + s * s * 120.0), rel=1e-12)
    assert D[1, 1] == pytest.approx(TWO_PI * (s * s * 20.0 + c * c * 120.0), rel=1e-12)


@given(theta=angles, branch=branches, d=st.floats(min_value=0.0, max_value=1000.0))
def test_equal_dampings_give_isotropic_hybrid_damping(theta, branch, d):
    D = hybrid_damping(rotation_from_theta(theta, branch), d, d)
    np.testing.assert_allclose(D, TWO_PI * d * np.eye(2), atol=1e-9 * TWO_PI * max(d, 1.0))


@given(theta=angles, branch=branches)
def test_physical_stiffness_keeps_trace_and_determinant(theta, branch):
    hybrid = HybridStiffness(6.94e6, 7.03e6)
    K = hybrid.matrix()
    C = physical_stiffness_from_hybrid(rotation_from_theta(theta, branch), hybrid)
    assert np.trace(C) == pytest.approx(np.trace(K), rel=1e-12)
    assert np.linalg.det(C) == pytest.approx(np.linalg.det(K), rel=1e-9)


@settings(max_examples=500, deadline=None)
@given(
    theta=angles,
    branch=branches,
    d1=st.floats(min_value=0.0, max_value=500.0),
    d2=st.floats(min_value=0.0, max_value=500.0),
)
def test_canonical_point_keeps_damping_matrix_and_fixes_coupling_sign(theta, branch, d1, d2):
    p = ParamVector(theta, d1, d2, branch)
    q = canonical_point(p)
    assert 0.0 <= q.theta < math.pi
    assert (q.d1, q.d2) == (d1, d2)
    assert canonical_point(q) == q
    np.testing.assert_allclose(
        hybrid_damping(rotation_from_theta(q.theta, q.branch), d1, d2),
        hybrid_damping(rotation_from_theta(theta, branch), d1, d2),
        atol=1e-9 * TWO_PI * 500.0,
    )
    C = physical_stiffness_from_hybrid(rotation_from_theta(q.theta, q.branch), HybridStiffness(6.94e6, 7.03e6))
    assert C[0, 1] <= 1e-9 * C[0, 0]


def test_reflected_optimum_maps_to_rotation_at_truth():
    reflected = canonical_point(ParamVector(math.pi - TRUTH_THETA, 20.0, 120.0, Branch.REFLECTION))
    assert reflected.branch is Branch.ROTATION
    assert reflected.theta == pytest.approx(TRUTH_THETA, abs=1e-12)
    shifted = canonical_point(ParamVector(TRUTH_THETA - math.pi, 20.0, 120.0))
    assert shifted.branch is Branch.ROTATION
    assert shifted.theta == pytest.approx(TRUTH_THETA, abs=1e-12)
    assert canonical_point(ParamVector(TRUTH_THETA, 20.0, 120.0)) == ParamVector(TRUTH_THETA, 20.0, 120.0)


def test_damping_reference_is_eta_over_q():
    assert damping_reference(6e6, 7e6, 3e5, 7e4) == pytest.approx((20.0, 100.0))
    with pytest.raises(NonPositiveQ):
        damping_reference(6e6, 7e6, 0.0, 7e4)


def test_hybrid_stiffness_ordering():
    with pytest.raises(ValueError):
        HybridStiffness(7e6, 6e6)
    with pytest.raises(ValueError):
        HybridStiffness(0.0, 6e6)


def test_bounds_contains_and_clip():
    bounds = default_bounds()
    assert bounds.contains(ParamVector(0.0, 0.0, 0.0))
    assert not bounds.contains([7.0, 0.0, 0.0])
    np.testing.assert_allclose(bounds.clip([7.0, -2000.0, 5.0]), [TWO_PI, -1000.0, 5.0])
    with pytest.raises(ValueError):
        Bounds(p_min=(1.0, 0.0, 0.0), p_max=(0.0, 1.0, 1.0))


def test_param_vector_array_conversion():
    p = ParamVector(1.5, 2.0, 3.0, Branch.REFLECTION)
    again = ParamVector.from_array(p.as_array(), p.branch)
    assert again == p
    assert p.to_dict()["branch"] == "reflection"
