import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_phase.lib.errors import RejectedInput, SingularSystemError
from sparse_phase.lib.linalg import (
    as_vector,
    matvec,
    principal_eigenvector,
    restricted_least_squares,
    transpose_matvec,
)
from sparse_phase.models.signals import Rng, SupportSet


def _gaussian_elimination(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Plain Gaussian elimination with partial pivoting"""
    augmented = np.column_stack([M.astype(float), b.astype(float)])
    size = M.shape[0]
    for col in range(size):
        pivot = col + int(np.argmax(np.abs(augmented[col:, col])))
        augmented[[col, pivot]] = augmented[[pivot, col]]
        for row in range(col + 1, size):
            augmented[row] -= augmented[row, col] / augmented[col, col] * augmented[col]
    solution = np.zeros(size)
    for row in reversed(range(size)):
        known = augmented[row, row + 1 : size] @ solution[row + 1 :]
        solution[row] = (augmented[row, -1] - known) / augmented[row, row]
    return solution


def test_matvec_identity_and_zero():
    np.testing.assert_array_equal(matvec(np.eye(3), [1, 2, 3]), [1, 2, 3])
    np.testing.assert_array_equal(matvec(np.zeros((2, 3)), [4, 5, 6]), [0, 0])


def test_transpose_matvec_extracts_rows():
    A = np.arange(12, dtype=float).reshape(4, 3)
    for i in range(4):
        np.testing.assert_array_equal(transpose_matvec(A, np.eye(4)[i]), A[i])


def test_matvec_matches_dot_products():
    gen = np.random.default_rng(7)
    A = gen.standard_normal((4, 3))
    x = gen.standard_normal(3)
    expected = [sum(A[i, j] * x[j] for j in range(3)) for i in range(4)]
    np.testing.assert_allclose(matvec(A, x), expected, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 12), n=st.integers(1, 12))
def test_matvec_and_transpose_are_adjoint(seed, m, n):
    gen = np.random.default_rng(seed)
    A = gen.standard_normal((m, n))
    x = gen.standard_normal(n)
    v = gen.standard_normal(m)
    assert matvec(A, x) @ v == pytest.approx(x @ transpose_matvec(A, v), rel=1e-10, abs=1e-10)


def test_shape_mismatch_is_rejected():
    with pytest.raises(RejectedInput):
        matvec(np.eye(3), [1, 2])
    with pytest.raises(RejectedInput):
        transpose_matvec(np.eye(3), [1, 2])
    with pytest.raises(RejectedInput):
        as_vector([1.0, np.nan])


def test_restricted_least_squares_full_support_solves_square_system():
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    b = np.array([3.0, 5.0])
    x = restricted_least_squares(A, b, SupportSet.from_indices([0, 1], 2))
    np.testing.assert_allclose(A @ x, b, atol=1e-12)


def test_restricted_least_squares_zero_rhs_and_empty_support():
    A = np.random.default_rng(1).standard_normal((6, 4))
    np.testing.assert_array_equal(restricted_least_squares(A, np.zeros(6), SupportSet.from_indices([1, 3], 4)), 0)
    np.testing.assert_array_equal(restricted_least_squares(A, np.ones(6), SupportSet.from_indices([], 4)), 0)


def test_restricted_least_squares_matches_gaussian_elimination():
    for trial in range(100):
        gen = np.random.default_rng(trial)
        s = int(gen.integers(1, 5))
        n = int(gen.integers(s, 9))
        m = int(gen.integers(s + 3, 13))
        A = gen.standard_normal((m, n))
        b = gen.standard_normal(m)
        support = SupportSet.from_indices(gen.choice(n, size=s, replace=False), n)

        columns = A[:, support.indices]
        expected = np.zeros(n)
        expected[support.indices] = _gaussian_elimination(columns.T @ columns, columns.T @ b)

        x = restricted_least_squares(A, b, support)
        assert np.linalg.norm(x - expected) <= 1e-9
        assert np.all(x[np.setdiff1d(np.arange(n), support.indices)] == 0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.integers(1, 4))
def test_restricted_residual_is_orthogonal_to_the_support_columns(seed, s):
    gen = np.random.default_rng(seed)
    A = gen.standard_normal((12, 8))
    b = gen.standard_normal(12)
    support = SupportSet.from_indices(gen.choice(8, size=s, replace=False), 8)
    x = restricted_least_squares(A, b, support)
    np.testing.assert_allclose(A[:, support.indices].T @ (A @ x - b), 0, atol=1e-9)


def test_restricted_least_squares_reproduces_a_consistent_system():
    gen = np.random.default_rng(21)
    A = gen.standard_normal((10, 6))
    support = SupportSet.from_indices([1, 4, 5], 6)
    w = np.zeros(6)
    w[support.indices] = gen.standard_normal(3)
    np.testing.assert_allclose(restricted_least_squares(A, A @ w, support), w, atol=1e-10)


def test_restricted_least_squares_flags_rank_deficiency():
    A = np.random.default_rng(3).standard_normal((5, 3))
    A[:, 2] = A[:, 0]
    with pytest.raises(SingularSystemError) as info:
        restricted_least_squares(A, np.ones(5), SupportSet.from_indices([0, 2], 3))
    assert info.value.pivot == 1
    # the remaining Schur complement, not the untouched diagonal entry of the Gram matrix
    assert abs(info.value.value) <= 1e-10 * float(A[:, 0] @ A[:, 0])


def test_restricted_least_squares_rejects_oversized_support():
    with pytest.raises(RejectedInput):
        restricted_least_squares(np.ones((2, 4)), np.ones(2), SupportSet.from_indices([0, 1, 2], 4))


def test_principal_eigenvector_diagonal():
    pair = principal_eigenvector(np.diag([3.0, 1.0, 1.0]), tol=1e-10)
    assert pair.converged
    assert pair.value == pytest.approx(3.0, rel=1e-9)
    assert abs(pair.vector[0]) == pytest.approx(1.0, abs=1e-9)


def test_principal_eigenvector_identity_converges_immediately():
    pair = principal_eigenvector(np.eye(4))
    assert pair.converged
    assert pair.iterations == 1
    assert pair.value == pytest.approx(1.0)
    assert np.linalg.norm(pair.vector) == pytest.approx(1.0)


def test_principal_eigenvector_matches_dense_solver():
    gen = np.random.default_rng(11)
    B = gen.standard_normal((6, 6))
    M = B @ B.T
    pair = principal_eigenvector(M, tol=1e-12, max_iter=100_000)
    values, vectors = np.linalg.eigh(M)
    assert pair.value == pytest.approx(values[-1], rel=1e-6)
    assert pair.vector @ M @ pair.vector == pytest.approx(pair.value, rel=1e-9)
    assert min(np.linalg.norm(pair.vector - vectors[:, -1]), np.linalg.norm(pair.vector + vectors[:, -1])) < 1e-5


def test_principal_eigenvector_reports_non_convergence():
    pair = principal_eigenvector(np.diag([1.0, 0.99, 0.98]), tol=1e-14, max_iter=2)
    assert not pair.converged
    assert pair.iterations == 2
    assert np.linalg.norm(pair.vector) == pytest.approx(1.0)


def test_principal_eigenvector_is_seeded():
    M = np.diag([2.0, 1.9, 0.5])
    first = principal_eigenvector(M, max_iter=3, seed=Rng(5, 2))
    second = principal_eigenvector(M, max_iter=3, seed=Rng(5, 2))
    np.testing.assert_array_equal(first.vector, second.vector)


def test_principal_eigenvector_needs_square_matrix():
    with pytest.raises(RejectedInput):
        principal_eigenvector(np.ones((2, 3)))
