"""
Dense kernels shared by every solver: products with the sampling matrix, the restricted least squares behind the HTP
update and power iteration for the spectral initialization.
"""

from typing import NamedTuple

import numpy as np
import numpy.typing as npt
from scipy.linalg import cho_solve, solve_triangular
from scipy.linalg.lapack import dpotrf

from sparse_phase.lib.constants import CHOLESKY_PIVOT_TOL, DEFAULT_EIGEN_MAX_ITER, DEFAULT_EIGEN_TOL
from sparse_phase.lib.errors import RejectedInput, SingularSystemError
from sparse_phase.lib.logging import lg
from sparse_phase.models.signals import DenseMatrix, DenseVector, Rng, SupportSet


class EigenPair(NamedTuple):
    vector: DenseVector
    value: float
    converged: bool
    iterations: int


def as_matrix(a: npt.ArrayLike) -> DenseMatrix:
    """Validates and converts to a finite float64 matrix"""
    matrix = np.asarray(a, dtype=np.float64)
    if matrix.ndim != 2:
        raise RejectedInput(f"Expected a 2-D matrix, got an array with shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise RejectedInput("Matrix entries must be finite")
    return matrix


def as_vector(v: npt.ArrayLike, length: int | None = None) -> DenseVector:
    """Validates and converts to a finite float64 vector, optionally of a fixed length"""
    vector = np.asarray(v, dtype=np.float64)
    if vector.ndim != 1:
        raise RejectedInput(f"Expected a 1-D vector, got an array with shape {vector.shape}")
    if length is not None and vector.shape[0] != length:
        raise RejectedInput(f"Expected a vector of length {length}, got {vector.shape[0]}")
    if not np.all(np.isfinite(vector)):
        raise RejectedInput("Vector entries must be finite")
    return vector


def matvec(A: npt.ArrayLike, x: npt.ArrayLike) -> DenseVector:
    matrix = as_matrix(A)
    return matrix @ as_vector(x, matrix.shape[1])


def transpose_matvec(A: npt.ArrayLike, v: npt.ArrayLike) -> DenseVector:
    matrix = as_matrix(A)
    return matrix.T @ as_vector(v, matrix.shape[0])


def _failed_pivot(gram: DenseMatrix, factor: DenseMatrix, k: int) -> float:
    """Schur complement g_kk - r^T r left at pivot k, where the leading k x k block of the factor is complete"""
    if k == 0:
        return float(gram[0, 0])
    row = solve_triangular(factor[:k, :k], gram[:k, k], lower=True)
    return float(gram[k, k] - row @ row)


def restricted_least_squares(A: DenseMatrix, b: DenseVector, support: SupportSet) -> DenseVector:
    """
    Solves min ||A x - b||_2 over vectors supported on S through the normal equation A_S^T A_S x_S = A_S^T b and a
    Cholesky factorization, at O(|S|^2 m) cost. The result is a full length vector which is zero off S.

    A pivot of the factorization at or below CHOLESKY_PIVOT_TOL (relative to the largest diagonal entry of the Gram
    matrix) marks A_S as rank deficient and raises SingularSystemError with the offending pivot.
    """
    if A.shape[0] != b.shape[0]:
        raise RejectedInput(f"Matrix has {A.shape[0]} rows but the right hand side has length {b.shape[0]}")
    if support.n != A.shape[1]:
        raise RejectedInput(f"Support is over {support.n} columns but the matrix has {A.shape[1]}")
    if len(support) > A.shape[0]:
        raise RejectedInput(f"Support of size {len(support)} exceeds the {A.shape[0]} available equations")

    x = np.zeros(A.shape[1])
    if len(support) == 0:
        return x

    columns = A[:, support.indices]
    gram = columns.T @ columns
    rhs = columns.T @ b

    scale = max(float(np.max(np.diag(gram))), np.finfo(np.float64).tiny)
    factor, info = dpotrf(gram, lower=1, clean=1)
    if info > 0:
        raise SingularSystemError(info - 1, _failed_pivot(gram, factor, info - 1))
    pivots = np.diag(factor) ** 2
    if (bad := np.flatnonzero(pivots <= CHOLESKY_PIVOT_TOL * scale)).size:
        raise SingularSystemError(int(bad[0]), float(pivots[bad[0]]))

    x[support.indices] = cho_solve((factor, True), rhs)
    return x


def principal_eigenvector(
    M: npt.ArrayLike,
    tol: float = DEFAULT_EIGEN_TOL,
    max_iter: int = DEFAULT_EIGEN_MAX_ITER,
    seed: int | Rng = 0,
) -> EigenPair:
    """
    Power iteration for the dominant eigenpair of a symmetric matrix, started from a seeded random unit vector.

    Converged means ||M v - λ v||_2 <= tol |λ|. When max_iter runs out the best iterate is still returned, flagged as
    not converged, and the caller decides what to do with it.
    """
    matrix = as_matrix(M)
    if matrix.shape[0] != matrix.shape[1]:
        raise RejectedInput(f"Power iteration needs a square matrix, got shape {matrix.shape}")
    matrix = (matrix + matrix.T) / 2

    rng = seed if isinstance(seed, Rng) else Rng(seed)
    v = rng.generator().standard_normal(matrix.shape[0])
    v /= np.linalg.norm(v)
    value = 0.0
    for iteration in range(1, max_iter + 1):
        w = matrix @ v
        value = float(v @ w)
        if np.linalg.norm(w - value * v) <= tol * abs(value):
            return EigenPair(v, value, True, iteration)
        v = w / np.linalg.norm(w)

    lg.warning(f"Power iteration did not converge in {max_iter} iterations (eigenvalue estimate {value:.6g})")
    return EigenPair(v, float(v @ (matrix @ v)), False, max_iter)
