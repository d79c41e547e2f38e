import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from discround.numeric import (
    InfeasiblePointError,
    LinearDescription,
    ToleranceModel,
    as_rows,
    numerical_rank,
    orthonormal_nullspace_basis,
    project_out,
    scale_and_orthonormalize,
    snap_to_feasible,
)


def test_tolerance_ordering_validated():
    with pytest.raises(ValueError):
        ToleranceModel(eps_rank=1e-6, eps_tight=1e-9)


def test_as_rows_rejects_ragged_and_nonfinite():
    with pytest.raises(ValueError, match="dimension mismatch"):
        as_rows([[1, 2], [1, 2, 3]])
    with pytest.raises(ValueError):
        as_rows([[1, np.nan]])
    with pytest.raises(ValueError):
        as_rows([[1, 2]], n=3)


def test_nullspace_of_sum_row():
    basis = orthonormal_nullspace_basis([[1, 1]])
    assert basis.shape == (1, 2)
    assert abs(abs(basis[0, 0]) - 1 / np.sqrt(2)) < 1e-12
    assert abs(basis[0] @ [1, 1]) < 1e-12


def test_nullspace_empty_rows_needs_dimension():
    assert np.allclose(orthonormal_nullspace_basis(np.zeros((0, 3)), n=3), np.eye(3))


def test_numerical_rank_detects_dependence():
    assert numerical_rank([[1, 2, 3], [2, 4, 6], [0, 0, 1]]) == 2


@settings(max_examples=40, deadline=None)
@given(arrays(float, (3, 6), elements=st.floats(-3, 3)))
def test_nullspace_basis_is_orthonormal_and_annihilated(rows):
    basis = orthonormal_nullspace_basis(rows)
    assert np.allclose(basis @ basis.T, np.eye(basis.shape[0]), atol=1e-10)
    if basis.size:
        assert np.max(np.abs(rows @ basis.T)) <= 1e-8 * max(1.0, np.abs(rows).max())
    assert basis.shape[0] == 6 - numerical_rank(rows)


@settings(max_examples=40, deadline=None)
@given(arrays(float, (5,), elements=st.floats(-2, 2)).filter(lambda r: np.linalg.norm(r) > 1e-3))
def test_project_out_keeps_orthonormality(row):
    basis = np.eye(5)
    new, reduced = project_out(basis, row)
    assert reduced and new.shape == (5, 4)
    assert np.allclose(new.T @ new, np.eye(4), atol=1e-12)
    assert np.max(np.abs(row @ new)) < 1e-12


def test_project_out_noop_for_orthogonal_row():
    basis = np.eye(3)[:, :2]
    new, reduced = project_out(basis, np.array([0.0, 0.0, 1.0]))
    assert not reduced and new.shape == (3, 2)


def test_scale_and_orthonormalize_spans_scaled_space():
    basis = orthonormal_nullspace_basis([[1, 1, 1]])
    d = np.array([0.5, 0.25, 0.125])
    out = scale_and_orthonormalize(basis, d)
    assert np.allclose(out @ out.T, np.eye(2))
    # every scaled original vector lies in the span
    proj = (basis * d) @ out.T @ out
    assert np.allclose(proj, basis * d)
    with pytest.raises(ValueError):
        scale_and_orthonormalize(basis, [1, 0, 1])


def test_snap_repairs_roundoff_and_rejects_far_points():
    q = LinearDescription(np.zeros(2), np.ones(2), np.array([[1.0, 1.0]]), np.array([1.0]))
    x = snap_to_feasible([0.5 + 1e-10, 0.5], q)
    assert abs(x.sum() - 1) < 1e-14
    with pytest.raises(InfeasiblePointError):
        snap_to_feasible([0.9, 0.9], q)
