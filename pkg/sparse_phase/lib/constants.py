from enum import StrEnum
from pathlib import Path

CONFIG_FOLDER = Path.home() / ".config/sparse-phase"

# Step size of a plain solve; the benchmark experiments run with DEFAULT_HARNESS_MU
DEFAULT_MU = 0.95
DEFAULT_HARNESS_MU = 0.75
DEFAULT_PWF_MU = 0.2
DEFAULT_MAX_ITER = 200
DEFAULT_STOP_TOL = 1e-12
DEFAULT_RESIDUAL_TOL = 1e-10
DEFAULT_STAGNATION_TOL = 1e-9

# Restricted least squares declares rank deficiency below this (relative) Cholesky pivot
CHOLESKY_PIVOT_TOL = 1e-12

DEFAULT_EIGEN_TOL = 1e-6
DEFAULT_EIGEN_MAX_ITER = 1000

SUCCESS_THRESHOLD = 1e-3
CONVERGENCE_THRESHOLD = 1e-10

DEFAULT_WAVELET_LEVELS = 4
WAVELET_SPARSITY_FRACTION = 0.01

# Sentinel returned by PSNR / SNR when the error (or noise) vanishes
INFINITE_RATIO = float("inf")


class SolverMethod(StrEnum):
    HTP = "htp"
    IHT = "iht"
    PWF = "pwf"


class Termination(StrEnum):
    RESIDUAL_CONVERGED = "residual_converged"
    ITERATE_STALLED = "iterate_stalled"
    SUPPORT_CYCLE = "support_cycle"
    MAX_ITER = "max_iter"
    SINGULAR_SYSTEM = "singular_system"


class ExperimentKind(StrEnum):
    ITER_TRACE = "iter_trace"
    ITER_COUNT_TABLE = "iter_count_table"
    TIMING = "timing"
    NOISE_SWEEP = "noise_sweep"
    PHASE_GRID = "phase_grid"
    WAVELET_1D = "wavelet_1d"
