from pathlib import Path
from typing import Any, NamedTuple

from pydantic import BaseModel, Field, field_validator, model_validator

from sparse_phase.lib import constants
from sparse_phase.lib.constants import ExperimentKind, SolverMethod, Termination
from sparse_phase.lib.wavelet import sparsity_budget

CSV_COLUMNS = (
    "kind",
    "n",
    "m",
    "s",
    "sigma",
    "mu",
    "method",
    "trial",
    "seed",
    "iterations",
    "seconds",
    "relative_error",
    "success",
    "termination",
)


class GridPoint(NamedTuple):
    n: int
    m: int
    s: int
    sigma: float
    mu: float


def _split_list(value: Any) -> Any:
    """Accepts "1, 2, 3" as well as [1, 2, 3] or a lone scalar"""
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    if isinstance(value, (int, float)):
        return [value]
    return value


class ExperimentSpec(BaseModel):
    """A declarative grid over (n, m, s, sigma, mu) crossed with solver methods and repeated trials"""

    kind: ExperimentKind
    n: list[int]
    m: list[int]
    s: list[int] = []
    """Sparsity levels. Left empty for the 1-D wavelet experiment, which then uses ⌊0.01 n⌋"""

    sigma: list[float] = [0.0]
    mu: list[float] = [constants.DEFAULT_HARNESS_MU]
    methods: list[SolverMethod] = [SolverMethod.HTP]
    trials: int = Field(100, ge=1)
    master_seed: int = Field(0, ge=0)
    output_path: Path = Path("results") / "experiment.csv"

    pwf_mu: float = Field(constants.DEFAULT_PWF_MU, gt=0)
    max_iter: int = Field(constants.DEFAULT_MAX_ITER, ge=0)
    success_threshold: float = Field(constants.SUCCESS_THRESHOLD, gt=0)
    convergence_threshold: float = Field(constants.CONVERGENCE_THRESHOLD, gt=0)
    levels: int = Field(constants.DEFAULT_WAVELET_LEVELS, ge=0)
    psnr_log10: bool = False
    workers: int = Field(1, ge=1)
    record_timings: bool = True
    """Wall-clock seconds are never reproducible; turning this off writes them as 0 so output is byte-identical"""

    @field_validator("n", "m", "s", "sigma", "mu", "methods", mode="before")
    @classmethod
    def parse_list(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("n", "m", "s")
    @classmethod
    def positive_counts(cls, values: list[int]) -> list[int]:
        if any(v < 1 for v in values):
            raise ValueError("grid counts must be positive")
        return values

    @field_validator("mu")
    @classmethod
    def positive_steps(cls, values: list[float]) -> list[float]:
        if any(v <= 0 for v in values):
            raise ValueError("step sizes must be positive")
        return values

    @field_validator("sigma")
    @classmethod
    def nonnegative_noise(cls, values: list[float]) -> list[float]:
        if any(v < 0 for v in values):
            raise ValueError("noise levels must be nonnegative")
        return values

    @model_validator(mode="after")
    def check_grid(self) -> "ExperimentSpec":
        for name in ("n", "m", "sigma", "mu", "methods"):
            if not getattr(self, name):
                raise ValueError(f"grid axis '{name}' is empty")
        if not self.s and self.kind != ExperimentKind.WAVELET_1D:
            raise ValueError("grid axis 's' is empty")
        if any(s > n for s in self.s for n in self.n):
            raise ValueError("every sparsity level must be at most every signal dimension")
        return self

    @property
    def summary_path(self) -> Path:
        return self.output_path.with_suffix(".json")

    def grid(self) -> list[GridPoint]:
        """Every grid point in a fixed order: n, m, s, sigma, mu"""
        return [
            GridPoint(n, m, s, sigma, mu)
            for n in self.n
            for m in self.m
            for s in (self.s or [sparsity_budget(n)])
            for sigma in self.sigma
            for mu in self.mu
        ]


class TrialRecord(BaseModel):
    """One (grid point, method, trial) outcome. Only the CSV_COLUMNS fields go to the CSV"""

    kind: ExperimentKind
    n: int
    m: int
    s: int
    sigma: float
    mu: float
    method: SolverMethod
    trial: int
    seed: int
    iterations: int
    seconds: float
    relative_error: float
    success: bool
    termination: Termination

    converged: bool = True
    """Reached the convergence threshold. Otherwise iterations counts what the solver actually executed"""

    init_relative_error: float | None = None
    snr_db: float | None = None
    psnr: float | None = None
    seconds_to_success: float | None = None
    """Initialization plus solve time up to the first iterate within the success threshold"""

    error_curve: list[float] = []
    """Relative error of x0, x1, ... (kept for iteration trace and timing experiments)"""

    time_curve: list[float] = []
    """Cumulative seconds at x0, x1, ... (timing experiments)"""

    @property
    def sort_key(self) -> tuple:
        return (self.n, self.m, self.s, self.sigma, self.mu, str(self.method), self.trial)

    @property
    def point(self) -> GridPoint:
        return GridPoint(self.n, self.m, self.s, self.sigma, self.mu)


class GridPointSummary(BaseModel):
    n: int
    m: int
    s: int
    sigma: float
    mu: float
    method: SolverMethod
    trials: int
    successes: int
    failures: int
    success_rate: float
    converged: int
    mean_iterations: float | None
    """Iteration statistics cover converged trials only and are None when no trial converged"""

    median_iterations: float | None
    max_iterations: int | None
    max_unconverged_iterations: int | None = None
    mean_seconds: float | None
    """Averaged over successful trials only"""

    mean_seconds_to_success: float | None = None

    log_mean_relative_error: float
    """Natural log of the mean relative error over all trials"""

    mean_snr_db: float | None = None
    mean_psnr: float | None = None
    min_psnr: float | None = None
    error_curve: list[float] = []
    """Natural log of the mean relative error after k iterations, k = 0, 1, ... Successful trials only for timing"""

    time_curve: list[float] = []
    """Mean cumulative seconds after k iterations over successful trials, paired with error_curve"""


class GridSummary(BaseModel):
    kind: ExperimentKind
    master_seed: int
    trials: int
    psnr_log_base: str
    points: list[GridPointSummary]
