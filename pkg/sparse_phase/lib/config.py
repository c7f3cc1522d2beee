import json
from contextlib import contextmanager
from pathlib import Path
from typing import Generator, Optional

from pydantic import BaseModel, Field

from sparse_phase.lib import constants
from sparse_phase.lib.constants import CONFIG_FOLDER

_CONFIG_FILE_LOCATION = CONFIG_FOLDER / "config.json"


class SolverSettings(BaseModel):
    """Library defaults used whenever a SolverConfig is built without explicit values"""

    mu: float = Field(constants.DEFAULT_MU, gt=0)
    """Step size for the HTP and IHT gradient steps"""

    pwf_mu: float = Field(constants.DEFAULT_PWF_MU, gt=0)
    """Step size for projected Wirtinger flow, which lives on a different scale than the amplitude methods"""

    max_iter: int = Field(constants.DEFAULT_MAX_ITER, ge=0)
    """Hard cap on the number of iterations of a single solve"""

    stop_tol: float = Field(constants.DEFAULT_STOP_TOL, gt=0)
    """A solve stops once the relative change between consecutive iterates drops below this"""

    residual_tol: float = Field(constants.DEFAULT_RESIDUAL_TOL, gt=0)
    """A solve stops once the relative amplitude residual drops below this"""

    stagnation_tol: float = Field(constants.DEFAULT_STAGNATION_TOL, gt=0)
    """Relative residual change under which a repeated HTP support counts as a cycle"""


class SpectralSettings(BaseModel):
    """Controls the power iteration behind the spectral initialization"""

    tol: float = Field(constants.DEFAULT_EIGEN_TOL, gt=0)
    max_iter: int = Field(constants.DEFAULT_EIGEN_MAX_ITER, ge=1)


class MetricsSettings(BaseModel):
    success_threshold: float = Field(constants.SUCCESS_THRESHOLD, gt=0)
    """A recovery with relative error at or below this counts as a success"""

    psnr_log10: bool = False
    """Report PSNR with log10 (decibels) instead of the natural logarithm"""


class HarnessSettings(BaseModel):
    """Defaults for the benchmark harness; experiment files and CLI flags override these"""

    mu: float = Field(constants.DEFAULT_HARNESS_MU, gt=0)
    trials: int = Field(100, ge=1)
    workers: int = Field(1, ge=1)
    """How many worker processes trials are spread across. Results do not depend on this"""

    convergence_threshold: float = Field(constants.CONVERGENCE_THRESHOLD, gt=0)
    """Relative error that counts as converged when counting iterations"""

    max_iter: int = Field(constants.DEFAULT_MAX_ITER, ge=0)
    output_directory: Path = Path("results")


class CoreConfig(BaseModel):
    logfile_path: Path = CONFIG_FOLDER / "sparse_phase.log"
    """Controls where the application logs should be stored"""

    logfile_max_bytes: int = 5000000
    """Controls large the application log can grow before being rotated"""

    logfile_count: int = 5
    """Controls how many rotated application logs to keep"""


_CONFIG_INSTANCE: Optional["Config"] = None


class Config(BaseModel):
    solver: SolverSettings = SolverSettings()
    """Default solver parameters"""

    spectral: SpectralSettings = SpectralSettings()
    """Controls the spectral initialization"""

    metrics: MetricsSettings = MetricsSettings()
    """Controls how recoveries are scored"""

    harness: HarnessSettings = HarnessSettings()
    """Defaults for experiment runs"""

    core: CoreConfig = CoreConfig()
    """Customizing shared core behaviors, such as logging"""

    @classmethod
    def load_config(cls) -> "Config":
        global _CONFIG_INSTANCE
        if _CONFIG_INSTANCE is None:
            if _CONFIG_FILE_LOCATION.exists():
                _CONFIG_INSTANCE = cls(**json.loads(_CONFIG_FILE_LOCATION.read_text()))
            else:
                _CONFIG_INSTANCE = cls()
        return _CONFIG_INSTANCE

    def save(self) -> None:
        CONFIG_FOLDER.mkdir(parents=True, exist_ok=True)
        _CONFIG_FILE_LOCATION.write_text(self.model_dump_json(indent=4))

    @classmethod
    @contextmanager
    def to_edit(cls) -> Generator["Config", None, None]:
        current_config = cls.load_config()
        yield current_config
        current_config.save()
