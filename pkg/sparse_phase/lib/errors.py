from pathlib import Path


class SparsePhaseError(Exception):
    pass


class RejectedInput(SparsePhaseError, ValueError):
    """Raised when an operation receives arguments that violate its preconditions (shapes, ranges, finiteness)"""

    pass


class SingularSystemError(SparsePhaseError):
    """The restricted Gram matrix A_S^T A_S is numerically rank deficient"""

    def __init__(self, pivot: int, value: float) -> None:
        super().__init__(f"Restricted normal equation is singular at pivot {pivot} (Schur complement {value:.3e})")
        self.pivot = pivot
        self.value = value


class ExperimentOutputError(SparsePhaseError, OSError):
    def __init__(self, path: Path, reason: str) -> None:
        super().__init__(f"Cannot write experiment output to {path}: {reason}")
        self.path = path
        self.reason = reason
