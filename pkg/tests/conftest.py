from typing import Callable

import pytest

from sparse_phase.lib.config import Config, CoreConfig
from sparse_phase.lib.context import SparsePhaseContext
from sparse_phase.lib.measurements import ENSEMBLE_STREAM, SIGNAL_STREAM, generate_ensemble, generate_signal
from sparse_phase.models.signals import MeasurementEnsemble, Rng, SparseSignal

Instance = tuple[SparseSignal, MeasurementEnsemble]


@pytest.fixture(autouse=True)
def isolated_config(tmp_path) -> Config:
    """Every test runs against default settings and never touches the user's config or log file"""
    config = Config(core=CoreConfig(logfile_path=tmp_path / "sparse_phase.log"))
    SparsePhaseContext.use_config(config)
    return config


@pytest.fixture
def make_instance() -> Callable[..., Instance]:
    def factory(n: int, m: int, s: int, sigma: float = 0.0, seed: int = 0) -> Instance:
        rng = Rng(seed)
        signal = generate_signal(n, s, rng.child(SIGNAL_STREAM))
        return signal, generate_ensemble(signal, m, sigma, rng.child(ENSEMBLE_STREAM))

    return factory

