import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import numpy.typing as npt

from sparse_phase.lib.constants import INFINITE_RATIO, SUCCESS_THRESHOLD
from sparse_phase.lib.errors import RejectedInput
from sparse_phase.lib.linalg import as_vector
from sparse_phase.models.signals import DenseVector


@dataclass(frozen=True)
class RecoveryAssessment:
    dist: float
    relative_error: float
    success: bool
    iterations: int
    seconds: float
    psnr: float | None = None


def _pair(x: npt.ArrayLike, x_ref: npt.ArrayLike) -> tuple[DenseVector, DenseVector]:
    first = as_vector(x)
    second = as_vector(x_ref)
    if first.shape != second.shape:
        raise RejectedInput(f"Vectors have different lengths: {first.shape[0]} and {second.shape[0]}")
    return first, second


def dist(x: npt.ArrayLike, x_ref: npt.ArrayLike) -> float:
    """min(||x - x_ref||_2, ||x + x_ref||_2), the distance modulo the global sign"""
    first, second = _pair(x, x_ref)
    return float(min(np.linalg.norm(first - second), np.linalg.norm(first + second)))


def align_sign(x: npt.ArrayLike, x_ref: npt.ArrayLike) -> DenseVector:
    """Returns whichever of ±x is closer to the reference"""
    first, second = _pair(x, x_ref)
    return first if np.linalg.norm(first - second) <= np.linalg.norm(first + second) else -first


def relative_error(x: npt.ArrayLike, x_ref: npt.ArrayLike) -> float:
    reference = float(np.linalg.norm(as_vector(x_ref)))
    distance = dist(x, x_ref)
    return distance / reference if reference > 0 else distance


def psnr(x_hat: npt.ArrayLike, x_ref: npt.ArrayLike, log10: bool = False) -> float:
    """
    10 log(V² / MSE) with V the largest magnitude over both vectors and the MSE taken after sign alignment. The
    logarithm is natural unless log10 is requested. A vanishing MSE gives +inf.
    """
    estimate, reference = _pair(x_hat, x_ref)
    peak = float(max(np.max(np.abs(estimate), initial=0.0), np.max(np.abs(reference), initial=0.0)))
    if peak == 0:
        raise RejectedInput("PSNR is undefined when both vectors are zero")
    mse = float(np.mean((align_sign(estimate, reference) - reference) ** 2))
    if mse == 0:
        return INFINITE_RATIO
    ratio = peak**2 / mse
    return 10 * (math.log10(ratio) if log10 else math.log(ratio))


def snr_db(y_clean: npt.ArrayLike, noise: npt.ArrayLike) -> float:
    """10 log10(||y||² / ||noise||²), +inf for noise-free data"""
    signal, perturbation = _pair(y_clean, noise)
    noise_energy = float(perturbation @ perturbation)
    if noise_energy == 0:
        return INFINITE_RATIO
    return 10 * math.log10(float(signal @ signal) / noise_energy)


def assess(
    x_hat: npt.ArrayLike,
    x_true: npt.ArrayLike,
    iterations: int,
    seconds: float,
    success_threshold: float = SUCCESS_THRESHOLD,
    with_psnr: bool = False,
    psnr_log10: bool = False,
    synthesis: Callable[[DenseVector], DenseVector] | None = None,
) -> RecoveryAssessment:
    """
    Errors are measured on the unknowns themselves. PSNR, when requested, compares synthesis(x_hat) against
    synthesis(x_true), e.g. signals rebuilt from wavelet coefficients.
    """
    error = relative_error(x_hat, x_true)
    if with_psnr and synthesis is not None:
        peak_signal_to_noise = psnr(synthesis(as_vector(x_hat)), synthesis(as_vector(x_true)), log10=psnr_log10)
    elif with_psnr:
        peak_signal_to_noise = psnr(x_hat, x_true, log10=psnr_log10)
    else:
        peak_signal_to_noise = None
    return RecoveryAssessment(
        dist=dist(x_hat, x_true),
        relative_error=error,
        success=error <= success_threshold,
        iterations=iterations,
        seconds=seconds,
        psnr=peak_signal_to_noise,
    )
