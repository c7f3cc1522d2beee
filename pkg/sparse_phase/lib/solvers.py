"""
Iterative solvers for sparse phase retrieval. All three methods share the sign-guessing view of the amplitude model:
given x_k, the phaseless data y is completed to y ⊙ sgn(A x_k) and one step of a compressed sensing method is taken.

* HTP: estimate the support with a hard-thresholded gradient step, then solve the least squares on that support
  exactly. Converges in finitely many steps inside the basin of attraction.
* IHT: projected gradient descent on f(x) = ½ || y - |Ax| ||², linear convergence.
* PWF: projected gradient descent on the intensity loss f_I(x) = ½ || y² - |Ax|² ||².
"""

import time
from typing import Callable

import numpy as np
import numpy.typing as npt

from sparse_phase.lib.constants import SolverMethod, Termination
from sparse_phase.lib.errors import RejectedInput, SingularSystemError
from sparse_phase.lib.linalg import as_vector, restricted_least_squares
from sparse_phase.lib.logging import lg
from sparse_phase.models.signals import DenseVector, MeasurementEnsemble, SupportSet
from sparse_phase.models.solvers import SolverConfig, SolverTrace


def top_indices(magnitudes: npt.NDArray[np.float64], s: int) -> npt.NDArray[np.intp]:
    """Sorted indices of the s largest entries; among equal entries the lowest index wins"""
    if not 0 <= s <= magnitudes.shape[0]:
        raise RejectedInput(f"Cannot keep {s} entries of a vector of length {magnitudes.shape[0]}")
    return np.sort(np.argsort(-magnitudes, kind="stable")[:s])


def hard_threshold(v: npt.ArrayLike, s: int) -> DenseVector:
    """H_s: keeps the s largest entries in magnitude and zeroes the rest"""
    vector = as_vector(v)
    keep = top_indices(np.abs(vector), s)
    thresholded = np.zeros_like(vector)
    thresholded[keep] = vector[keep]
    return thresholded


def relative_residual(ensemble: MeasurementEnsemble, x: DenseVector) -> float:
    """|| |Ax| - y ||_2 / ||y||_2 (the plain norm when y vanishes)"""
    misfit = float(np.linalg.norm(np.abs(ensemble.A @ x) - ensemble.y_observed))
    y_norm = float(np.linalg.norm(ensemble.y_observed))
    return misfit / y_norm if y_norm > 0 else misfit


def _amplitude_gradient_step(
    ensemble: MeasurementEnsemble, x_k: DenseVector, mu: float
) -> tuple[DenseVector, DenseVector]:
    """Returns y ⊙ sgn(A x_k) and the unprojected step x_k + μ A^T(y ⊙ sgn(A x_k) - A x_k)"""
    z = ensemble.A @ x_k
    signed = ensemble.y_observed * np.sign(z)
    return signed, x_k + mu * (ensemble.A.T @ (signed - z))


def htp_step(ensemble: MeasurementEnsemble, x_k: DenseVector, cfg: SolverConfig) -> tuple[DenseVector, SupportSet]:
    """
    One iteration of hard thresholding pursuit. Expects ||x_k||_0 <= s, which is not checked.
    Raises SingularSystemError when the least squares on the new support is rank deficient.
    """
    signed, proposal = _amplitude_gradient_step(ensemble, x_k, cfg.mu)
    support = SupportSet.of(hard_threshold(proposal, cfg.s), budget=cfg.s)
    return restricted_least_squares(ensemble.A, signed, support), support


def iht_step(ensemble: MeasurementEnsemble, x_k: DenseVector, cfg: SolverConfig) -> DenseVector:
    _, proposal = _amplitude_gradient_step(ensemble, x_k, cfg.mu)
    return hard_threshold(proposal, cfg.s)


def pwf_gradient(ensemble: MeasurementEnsemble, x: DenseVector) -> DenseVector:
    """∇f_I(x) = 2 A^T(((Ax)² - y²) ⊙ Ax)"""
    z = ensemble.A @ x
    return 2 * (ensemble.A.T @ ((z**2 - ensemble.y_observed**2) * z))


def pwf_step(ensemble: MeasurementEnsemble, x_k: DenseVector, cfg: SolverConfig) -> DenseVector:
    """Projected Wirtinger flow step. The step size is measured in units of 1 / (2 ||y||²)"""
    energy = float(ensemble.y_observed @ ensemble.y_observed)
    step = cfg.pwf_mu / (2 * energy) if energy > 0 else cfg.pwf_mu / 2
    return hard_threshold(x_k - step * pwf_gradient(ensemble, x_k), cfg.s)


def _iht_with_support(
    ensemble: MeasurementEnsemble, x_k: DenseVector, cfg: SolverConfig
) -> tuple[DenseVector, SupportSet]:
    x_next = iht_step(ensemble, x_k, cfg)
    return x_next, SupportSet.of(x_next, budget=cfg.s)


def _pwf_with_support(
    ensemble: MeasurementEnsemble, x_k: DenseVector, cfg: SolverConfig
) -> tuple[DenseVector, SupportSet]:
    x_next = pwf_step(ensemble, x_k, cfg)
    return x_next, SupportSet.of(x_next, budget=cfg.s)


StepFunction = Callable[[MeasurementEnsemble, DenseVector, SolverConfig], tuple[DenseVector, SupportSet]]

_STEPS: dict[SolverMethod, StepFunction] = {
    SolverMethod.HTP: htp_step,
    SolverMethod.IHT: _iht_with_support,
    SolverMethod.PWF: _pwf_with_support,
}


def solve(
    method: SolverMethod | str,
    ensemble: MeasurementEnsemble,
    x0: npt.ArrayLike,
    cfg: SolverConfig,
) -> SolverTrace:
    """
    Iterates the chosen method from x0 until one of the stopping rules fires, checked in this order:
    relative residual <= residual_tol, relative iterate change < stop_tol, an HTP support repeated with a stagnant
    residual, or max_iter iterations. A singular least squares ends the trace with singular_system.
    """
    method = SolverMethod(method)
    step = _STEPS[method]
    x = as_vector(x0, ensemble.n).copy()
    trace = SolverTrace(method, x)

    previous_support: SupportSet | None = None
    previous_residual: float | None = None
    for k in range(cfg.max_iter):
        started = time.perf_counter()
        try:
            x_next, support = step(ensemble, x, cfg)
        except SingularSystemError as e:
            lg.warning(f"{method.upper()} stopped at iteration {k + 1}: {e}")
            trace.termination = Termination.SINGULAR_SYSTEM
            break
        residual = relative_residual(ensemble, x_next)
        trace.append(x_next, support, residual, time.perf_counter() - started)
        lg.debug(f"{method.upper()} iteration {k + 1}: residual={residual:.3e} |S|={len(support)}")

        x_norm = float(np.linalg.norm(x))
        change = float(np.linalg.norm(x_next - x))
        change = change / x_norm if x_norm > 0 else change

        if residual <= cfg.residual_tol:
            trace.termination = Termination.RESIDUAL_CONVERGED
            break
        if change < cfg.stop_tol:
            trace.termination = Termination.ITERATE_STALLED
            break
        if (
            method == SolverMethod.HTP
            and support == previous_support
            and previous_residual is not None
            and abs(residual - previous_residual) <= cfg.stagnation_tol * previous_residual
        ):
            trace.termination = Termination.SUPPORT_CYCLE
            break

        x = x_next
        previous_support = support
        previous_residual = residual

    lg.debug(f"{method.upper()} finished after {trace.iterations} iterations: {trace.termination}")
    return trace
