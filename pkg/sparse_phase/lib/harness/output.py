import csv
import os
from pathlib import Path
from typing import Iterable

from sparse_phase.lib.errors import ExperimentOutputError
from sparse_phase.lib.logging import lg
from sparse_phase.models.experiments import CSV_COLUMNS, GridSummary, TrialRecord
from sparse_phase.models.solvers import SolverTrace


def _format(value: object) -> str:
    """Fixed textual contract: lowercase booleans, shortest round-trip floats, enums by value"""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def ensure_writable(path: Path) -> None:
    """Fails fast (before any compute) when the output location cannot be written"""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ExperimentOutputError(path, str(e)) from e
    if path.is_dir():
        raise ExperimentOutputError(path, "path is a directory")
    if path.exists() and not os.access(path, os.W_OK):
        raise ExperimentOutputError(path, "file is not writable")
    if not os.access(path.parent, os.W_OK):
        raise ExperimentOutputError(path, "directory is not writable")


def emit_csv(records: Iterable[TrialRecord], path: Path) -> None:
    """Writes one row per trial record under a mandatory header. UTF-8, '.' decimals, LF line endings"""
    try:
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for record in records:
                writer.writerow([_format(getattr(record, column)) for column in CSV_COLUMNS])
    except OSError as e:
        raise ExperimentOutputError(path, str(e)) from e
    lg.info(f"Wrote trial records to {path}")


def emit_summary_json(summary: GridSummary, path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(summary.model_dump_json(indent=4), encoding="utf-8")
    except OSError as e:
        raise ExperimentOutputError(path, str(e)) from e
    lg.info(f"Wrote grid summary to {path}")


TRACE_COLUMNS = ("iteration", "residual", "support_size", "seconds")


def emit_trace_csv(trace: SolverTrace, path: Path) -> None:
    """Per-iteration log of a single solve"""
    ensure_writable(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for k, (residual, support, seconds) in enumerate(
                zip(trace.residuals, trace.supports, trace.per_iter_seconds), start=1
            ):
                writer.writerow([k, _format(residual), len(support), _format(seconds)])
    except OSError as e:
        raise ExperimentOutputError(path, str(e)) from e
