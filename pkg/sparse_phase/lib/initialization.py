"""
Two step spectral initialization: pick the support from the marginal scores (1/m) Σ y_i² [a_i]_j², then take the
principal eigenvector of (1/m) Σ y_i² [a_i]_S [a_i]_S^T restricted to that support, rescaled to length ||y||_2.

Both the scores and the spectral matrix are formed at raw measurement scale (unscaled a_i and y_i). Since A and y are
stored divided by √m, the raw quantities are recovered as √m A and √m y.
"""

from dataclasses import dataclass

import numpy as np

from sparse_phase.lib.constants import DEFAULT_EIGEN_MAX_ITER, DEFAULT_EIGEN_TOL
from sparse_phase.lib.errors import RejectedInput
from sparse_phase.lib.linalg import principal_eigenvector
from sparse_phase.lib.logging import lg
from sparse_phase.lib.solvers import top_indices
from sparse_phase.models.signals import DenseVector, MeasurementEnsemble, Rng, SupportSet


@dataclass(frozen=True, eq=False)
class InitReport:
    estimated_support: SupportSet
    x0: DenseVector
    eigen_converged: bool
    eigenvalue: float


def support_scores(ensemble: MeasurementEnsemble) -> DenseVector:
    """score_j = (1/m) Σ_i y_i² [a_i]_j² over the raw measurements"""
    m = ensemble.m
    # (1/m) Σ (m y_i²)(m A_ij²) with the stored, scaled A and y
    return m * ((ensemble.y_observed**2) @ (ensemble.A**2))


def estimate_support(ensemble: MeasurementEnsemble, s: int) -> SupportSet:
    """Indices of the s largest scores, ties going to the lowest index"""
    if not 1 <= s <= ensemble.n:
        raise RejectedInput(f"Sparsity must satisfy 1 <= s <= n, got s={s}, n={ensemble.n}")
    return SupportSet.from_indices(top_indices(support_scores(ensemble), s), ensemble.n, budget=s)


def spectral_matrix(ensemble: MeasurementEnsemble, support: SupportSet) -> np.ndarray:
    """(1/m) Σ_i y_i² [a_i]_S [a_i]_S^T over the raw measurements"""
    columns = ensemble.A[:, support.indices]
    weights = ensemble.y_observed**2
    return ensemble.m * (columns.T @ (weights[:, np.newaxis] * columns))


def spectral_init(
    ensemble: MeasurementEnsemble,
    s: int,
    rng: Rng,
    tol: float = DEFAULT_EIGEN_TOL,
    max_iter: int = DEFAULT_EIGEN_MAX_ITER,
) -> InitReport:
    if s > min(ensemble.m, ensemble.n):
        raise RejectedInput(f"Sparsity {s} exceeds min(m, n) = {min(ensemble.m, ensemble.n)}")

    support = estimate_support(ensemble, s)
    eigen = principal_eigenvector(spectral_matrix(ensemble, support), tol=tol, max_iter=max_iter, seed=rng)
    if not eigen.converged:
        lg.warning(f"Spectral initialization used a non-converged eigenvector after {eigen.iterations} iterations")

    # The global sign is unidentifiable; pin it so that the largest entry in magnitude is positive
    direction = eigen.vector
    if direction[np.argmax(np.abs(direction))] < 0:
        direction = -direction

    x0 = np.zeros(ensemble.n)
    x0[support.indices] = direction * np.linalg.norm(ensemble.y_observed)
    return InitReport(support, x0, eigen.converged, eigen.value)
