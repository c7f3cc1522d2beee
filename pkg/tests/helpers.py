import numpy as np

from sparse_phase.models.signals import MeasurementEnsemble, SparseSignal


def hand_ensemble(raw: np.ndarray, x: np.ndarray) -> MeasurementEnsemble:
    """A noise-free ensemble built from an explicit raw sampling matrix"""
    m = raw.shape[0]
    y = np.abs(raw @ x) / np.sqrt(m)
    return MeasurementEnsemble(raw / np.sqrt(m), y, y.copy(), 0.0, 0, SparseSignal.from_dense(x))
