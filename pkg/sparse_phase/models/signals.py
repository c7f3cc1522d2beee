from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
import numpy.typing as npt

from sparse_phase.lib.errors import RejectedInput

DenseVector = npt.NDArray[np.float64]
DenseMatrix = npt.NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class SupportSet:
    """Strictly increasing column indices in [0, n), optionally bounded by the sparsity budget it was built under"""

    indices: npt.NDArray[np.intp]
    n: int
    budget: int | None = None

    def __post_init__(self) -> None:
        indices = np.asarray(self.indices, dtype=np.intp).reshape(-1)
        if indices.size and (indices[0] < 0 or indices[-1] >= self.n):
            raise RejectedInput(f"Support indices must lie in [0, {self.n})")
        if indices.size > 1 and np.any(np.diff(indices) <= 0):
            raise RejectedInput("Support indices must be strictly increasing")
        if self.budget is not None and indices.size > self.budget:
            raise RejectedInput(f"Support of size {indices.size} exceeds its sparsity budget {self.budget}")
        indices.setflags(write=False)
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_indices(cls, indices: npt.ArrayLike, n: int, budget: int | None = None) -> "SupportSet":
        """Builds a support from indices in any order (duplicates are collapsed)"""
        return cls(np.unique(np.asarray(indices, dtype=np.intp)), n, budget)

    @classmethod
    def of(cls, vector: DenseVector, budget: int | None = None) -> "SupportSet":
        """supp(v): the indices of the nonzero entries"""
        return cls(np.flatnonzero(vector), vector.shape[0], budget)

    def __len__(self) -> int:
        return int(self.indices.size)

    def __iter__(self) -> Iterator[int]:
        return (int(i) for i in self.indices)

    def __contains__(self, index: object) -> bool:
        return isinstance(index, (int, np.integer)) and bool(np.any(self.indices == index))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SupportSet):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.indices, other.indices)

    def __hash__(self) -> int:
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"SupportSet({self.indices.tolist()}, n={self.n})"

    def issubset(self, other: "SupportSet") -> bool:
        return bool(np.all(np.isin(self.indices, other.indices)))


@dataclass(frozen=True)
class Rng:
    """
    A reproducible random stream. Draws depend only on (seed, stream): the bit generator is the counter-based Philox
    keyed through a SeedSequence, so sibling streams are statistically independent and platform independent.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(sequence))

    def child(self, stream: int) -> "Rng":
        return Rng(self.seed, stream)


@dataclass(frozen=True, eq=False)
class SparseSignal:
    """The ground truth: an s-sparse vector together with its support"""

    n: int
    s: int
    support: SupportSet
    values: DenseVector
    full: DenseVector = field(repr=False)

    @classmethod
    def from_dense(cls, full: DenseVector, s: int | None = None) -> "SparseSignal":
        full = np.asarray(full, dtype=np.float64)
        support = SupportSet.of(full)
        sparsity = len(support) if s is None else s
        if len(support) > sparsity:
            raise RejectedInput(f"Signal has {len(support)} nonzeros, more than its sparsity {sparsity}")
        return cls(full.shape[0], sparsity, support, full[support.indices].copy(), full)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.full))

    @property
    def min_magnitude(self) -> float:
        """The smallest nonzero entry in magnitude"""
        return float(np.min(np.abs(self.values))) if self.values.size else 0.0


@dataclass(frozen=True, eq=False)
class MeasurementEnsemble:
    """
    The scaled sampling matrix A = [a_1 ... a_m]^T / √m together with the phaseless observations. y_clean holds
    |a_i^T x| / √m and y_observed the noisy version (y_i + σ ε_i) / √m.
    """

    A: DenseMatrix = field(repr=False)
    y_clean: DenseVector = field(repr=False)
    y_observed: DenseVector = field(repr=False)
    sigma: float
    seed: int
    signal: SparseSignal | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def noise(self) -> DenseVector:
        """The scaled noise actually added to the observations"""
        return self.y_observed - self.y_clean
