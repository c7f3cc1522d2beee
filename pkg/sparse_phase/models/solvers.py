from dataclasses import dataclass, field
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from sparse_phase.lib import constants
from sparse_phase.lib.config import SolverSettings
from sparse_phase.lib.constants import SolverMethod, Termination
from sparse_phase.models.signals import DenseVector, SupportSet


class SolverConfig(BaseModel):
    """Per-solve parameters. The sparsity budget has no default; everything else falls back to SolverSettings"""

    model_config = ConfigDict(frozen=True)

    s: int = Field(ge=1)
    mu: float = Field(constants.DEFAULT_MU, gt=0)
    pwf_mu: float = Field(constants.DEFAULT_PWF_MU, gt=0)
    max_iter: int = Field(constants.DEFAULT_MAX_ITER, ge=0)
    stop_tol: float = Field(constants.DEFAULT_STOP_TOL, gt=0)
    residual_tol: float = Field(constants.DEFAULT_RESIDUAL_TOL, gt=0)
    stagnation_tol: float = Field(constants.DEFAULT_STAGNATION_TOL, gt=0)

    @classmethod
    def from_settings(cls, s: int, settings: SolverSettings, **overrides: Any) -> "SolverConfig":
        values = settings.model_dump()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(s=s, **values)


@dataclass(eq=False)
class SolverTrace:
    """Everything a solve produced, one entry per executed iteration"""

    method: SolverMethod
    initial: DenseVector
    iterates: list[DenseVector] = field(default_factory=list)
    supports: list[SupportSet] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    per_iter_seconds: list[float] = field(default_factory=list)
    termination: Termination = Termination.MAX_ITER

    def append(self, iterate: DenseVector, support: SupportSet, residual: float, seconds: float) -> None:
        self.iterates.append(iterate)
        self.supports.append(support)
        self.residuals.append(residual)
        self.per_iter_seconds.append(seconds)

    @property
    def iterations(self) -> int:
        return len(self.iterates)

    @property
    def final(self) -> DenseVector:
        """The last iterate, or the starting point when no iteration ran"""
        return self.iterates[-1] if self.iterates else self.initial

    @property
    def total_seconds(self) -> float:
        return float(sum(self.per_iter_seconds))

    def relative_errors(self, x_true: DenseVector) -> list[float]:
        """dist(x_k, x_true) / ||x_true||_2 for every iterate"""
        reference = np.linalg.norm(x_true)
        reference = reference if reference > 0 else 1.0
        return [
            float(min(np.linalg.norm(x - x_true), np.linalg.norm(x + x_true)) / reference) for x in self.iterates
        ]

    def iterations_to(self, x_true: DenseVector, threshold: float) -> int | None:
        """The first iteration count k with relative error at or below the threshold, None if it never got there"""
        for k, error in enumerate(self.relative_errors(x_true), start=1):
            if error <= threshold:
                return k
        return None
