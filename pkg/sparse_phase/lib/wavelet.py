"""
Orthonormal multi-level Haar (Daubechies 1) transform. Coefficients are laid out as
[approximation band, coarsest details, ..., finest details], the approximation band having length n / 2^levels.
"""

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from sparse_phase.lib.constants import DEFAULT_WAVELET_LEVELS, WAVELET_SPARSITY_FRACTION
from sparse_phase.lib.errors import RejectedInput
from sparse_phase.lib.linalg import as_matrix, as_vector
from sparse_phase.models.signals import DenseMatrix, DenseVector

_SQRT2 = math.sqrt(2.0)

# Layout of the bundled test signal: five dominant approximation coefficients (positions as fractions of the
# approximation band) and 32 small detail coefficients, 37 nonzeros in total
_DOMINANT_POSITIONS = (0.08, 0.22, 0.42, 0.62, 0.83)
_DOMINANT_VALUES = (12.0, -9.0, 7.0, 5.5, -4.0)
_DETAIL_COUNT = 32
_DETAIL_MAGNITUDE = 0.05


@dataclass(frozen=True)
class WaveletPlan:
    n: int
    levels: int = DEFAULT_WAVELET_LEVELS

    def __post_init__(self) -> None:
        if self.n < 1 or self.levels < 0:
            raise RejectedInput(f"Invalid wavelet plan: n={self.n}, levels={self.levels}")
        if self.n % (1 << self.levels):
            raise RejectedInput(f"Signal length {self.n} is not divisible by 2^{self.levels}")

    @property
    def approximation_length(self) -> int:
        return self.n >> self.levels


def _analysis(values: np.ndarray, levels: int) -> np.ndarray:
    """Haar analysis along the first axis"""
    coefficients = values.copy()
    length = values.shape[0]
    for _ in range(levels):
        band = coefficients[:length].copy()
        half = length // 2
        coefficients[:half] = (band[0::2] + band[1::2]) / _SQRT2
        coefficients[half:length] = (band[0::2] - band[1::2]) / _SQRT2
        length = half
    return coefficients


def _synthesis(coefficients: np.ndarray, levels: int) -> np.ndarray:
    """Haar synthesis along the first axis, the exact inverse of _analysis"""
    values = coefficients.copy()
    length = coefficients.shape[0] >> levels
    for _ in range(levels):
        approximation = values[:length].copy()
        detail = values[length : 2 * length].copy()
        values[0 : 2 * length : 2] = (approximation + detail) / _SQRT2
        values[1 : 2 * length : 2] = (approximation - detail) / _SQRT2
        length *= 2
    return values


def haar_forward(x: npt.ArrayLike, plan: WaveletPlan) -> DenseVector:
    return _analysis(as_vector(x, plan.n), plan.levels)


def haar_inverse(c: npt.ArrayLike, plan: WaveletPlan) -> DenseVector:
    return _synthesis(as_vector(c, plan.n), plan.levels)


def synthesis_matrix(plan: WaveletPlan) -> DenseMatrix:
    """The n x n matrix W^{-1} with W^{-1} c = haar_inverse(c)"""
    return _synthesis(np.eye(plan.n), plan.levels)


def compose_sensing(G: npt.ArrayLike, plan: WaveletPlan) -> DenseMatrix:
    """Materializes A = G W^{-1}, so that A c = G haar_inverse(c) for wavelet coefficients c"""
    gaussian = as_matrix(G)
    if gaussian.shape[1] != plan.n:
        raise RejectedInput(f"Matrix has {gaussian.shape[1]} columns but the wavelet plan is over n={plan.n}")
    if plan.levels == 0:
        return gaussian.copy()
    return gaussian @ synthesis_matrix(plan)


def sparsity_budget(n: int) -> int:
    """⌊0.01 n⌋, the sparsity used when the true one is unknown"""
    return max(1, math.floor(WAVELET_SPARSITY_FRACTION * n))


def bundled_coefficients(plan: WaveletPlan) -> DenseVector:
    """Haar coefficients of the bundled test signal, exactly 37 of them nonzero"""
    approximation = plan.approximation_length
    if approximation < 8 or plan.n - approximation < _DETAIL_COUNT:
        raise RejectedInput(f"The bundled signal needs a larger plan than n={plan.n}, levels={plan.levels}")

    coefficients = np.zeros(plan.n)
    for position, value in zip(_DOMINANT_POSITIONS, _DOMINANT_VALUES):
        coefficients[math.floor(position * approximation)] = value

    details = np.linspace(approximation, plan.n - 1, _DETAIL_COUNT).astype(np.intp)
    signs = np.where(np.arange(_DETAIL_COUNT) % 2 == 0, 1.0, -1.0)
    coefficients[details] = signs * _DETAIL_MAGNITUDE * (1 + np.arange(_DETAIL_COUNT) % 3)
    return coefficients


def bundled_signal(plan: WaveletPlan) -> DenseVector:
    """A synthetic piecewise-constant 1-D signal that is sparse (37 nonzeros) under the Haar transform"""
    return haar_inverse(bundled_coefficients(plan), plan)
