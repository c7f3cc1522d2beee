import hashlib

import numpy as np
import numpy.typing as npt

from sparse_phase.lib.errors import RejectedInput
from sparse_phase.lib.linalg import as_matrix, as_vector
from sparse_phase.lib.logging import lg
from sparse_phase.models.signals import DenseVector, MeasurementEnsemble, Rng, SparseSignal, SupportSet

# Stream ids inside a single trial
SIGNAL_STREAM = 0
ENSEMBLE_STREAM = 1
INIT_STREAM = 2


def trial_seed(master_seed: int, *coordinates: object) -> int:
    """
    Derives a 63-bit seed from a master seed and the coordinates of a trial. Any single trial can be regenerated in
    isolation, and the seed does not depend on the order in which trials are executed.
    """
    key = "|".join([str(master_seed), *(repr(c) for c in coordinates)])
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


def generate_signal(n: int, s: int, rng: Rng) -> SparseSignal:
    """Draws an s-sparse signal: support uniform over all s-subsets of [0, n), nonzero values i.i.d. N(0, 1)"""
    if not 1 <= s <= n:
        raise RejectedInput(f"Sparsity must satisfy 1 <= s <= n, got s={s}, n={n}")

    generator = rng.generator()
    support = SupportSet.from_indices(generator.choice(n, size=s, replace=False), n, budget=s)
    values = generator.standard_normal(s)
    full = np.zeros(n)
    full[support.indices] = values
    return SparseSignal(n, s, support, values, full)


def generate_ensemble(signal: SparseSignal, m: int, sigma: float, rng: Rng) -> MeasurementEnsemble:
    """
    Draws m i.i.d. standard Gaussian sampling vectors and the phaseless observations of the signal.

    Noise is added at the raw measurement scale, y_i + σ ε_i with ε_i ~ N(0, 1), before dividing everything by √m.
    """
    if m < 1:
        raise RejectedInput(f"Need at least one measurement, got m={m}")
    generator = rng.generator()
    raw = generator.standard_normal((m, signal.n))
    return ensemble_from_matrix(signal, raw, sigma, rng.seed, generator)


def ensemble_from_matrix(
    signal: SparseSignal,
    raw: npt.ArrayLike,
    sigma: float,
    seed: int,
    generator: np.random.Generator,
) -> MeasurementEnsemble:
    """Builds the scaled ensemble from an unscaled sampling matrix whose rows are the a_i"""
    if sigma < 0:
        raise RejectedInput(f"Noise standard deviation must be nonnegative, got {sigma}")
    raw_matrix = as_matrix(raw)
    if raw_matrix.shape[1] != signal.n:
        raise RejectedInput(f"Sampling matrix has {raw_matrix.shape[1]} columns, signal has length {signal.n}")

    m = raw_matrix.shape[0]
    scale = np.sqrt(m)
    raw_clean = np.abs(raw_matrix @ signal.full)
    # Always drawn so that the sampling matrix and signal do not depend on sigma
    epsilon = generator.standard_normal(m)

    y_clean = raw_clean / scale
    y_observed = y_clean.copy() if sigma == 0 else (raw_clean + sigma * epsilon) / scale
    if (negative := int(np.count_nonzero(y_observed < 0))) > 0:
        lg.debug(f"{negative} noisy observations are negative, keeping them as-is")

    return MeasurementEnsemble(raw_matrix / scale, y_clean, y_observed, float(sigma), seed, signal)


def sign_vector(v: npt.ArrayLike) -> DenseVector:
    """sgn with the convention sgn(0) = 0"""
    return np.sign(as_vector(v))
