"""
Tests for the 2x2 linear-algebra helpers.
"""
import numpy as np
import pytest

from common.oscillator.matrix import (
    orthogonality_defect,
    require_orthogonal,
    solve_2x2,
    symmetric_eigen,
)
from common.shared.errors import NotOrthogonal


def test_orthogonality_defect_of_rotation_is_zero():
    c, s = np.cos(0.3), np.sin(0.3)
    T = np.array([[c, -s], [s, c]])
    assert orthogonality_defect(T) < 1e-15


def test_require_orthogonal_rejects_shear():
    with pytest.raises(NotOrthogonal):
        require_orthogonal(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_require_orthogonal_rejects_wrong_shape():
    with pytest.raises(NotOrthogonal):
        require_orthogonal(np.eye(3))


def test_solve_2x2_matches_numpy():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(6, 2, 2)) + 1j * rng.normal(size=(6, 2, 2))
    rhs = rng.normal(size=(6, 2)) + 1j * rng.normal(size=(6, 2))
    x, det = solve_2x2(M, rhs)
    expected = np.linalg.solve(M, rhs[..., None])[..., 0]
    np.testing.assert_allclose(x, expected, rtol=1e-10)
    np.testing.assert_allclose(det, np.linalg.det(M), rtol=1e-10)


def test_solve_2x2_singular_row_is_nan_with_zero_determinant():
    M = np.array([[[1.0, 2.0], [2.0, 4.0]], [[2.0, 0.0], [0.0, 4.0]]])
    rhs = np.array([[1.0, 1.0], [2.0, 4.0]])
    x, det = solve_2x2(M, rhs)
    assert det[0] == 0
    assert np.all(~np.isfinite(x[0]))
    np.testing.assert_allclose(x[1], [1.0, 1.0])


def test_symmetric_eigen_is_ascending():
    values, vectors = symmetric_eigen(np.array([[5.0, 1.0], [1.0, 2.0]]))
    assert values[0] < values[1]
    assert orthogonality_defect(vectors) < 1e-12
