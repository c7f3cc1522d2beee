import functools
from pathlib import Path
from typing import Any, Callable

import click
import rich
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from sparse_phase.lib.config import _CONFIG_FILE_LOCATION, Config
from sparse_phase.lib.constants import ExperimentKind, SolverMethod
from sparse_phase.lib.context import SparsePhaseContext
from sparse_phase.lib.errors import SparsePhaseError
from sparse_phase.lib.harness.experiments import run_experiment
from sparse_phase.lib.harness.output import emit_trace_csv
from sparse_phase.lib.harness.spec_file import build_spec, load_spec_file
from sparse_phase.lib.initialization import spectral_init
from sparse_phase.lib.logging import attach_stream_handler
from sparse_phase.lib.measurements import (
    ENSEMBLE_STREAM,
    INIT_STREAM,
    SIGNAL_STREAM,
    generate_ensemble,
    generate_signal,
)
from sparse_phase.lib.metrics import assess, relative_error
from sparse_phase.lib.solvers import solve as run_solver
from sparse_phase.models.experiments import ExperimentSpec, GridSummary
from sparse_phase.models.signals import Rng
from sparse_phase.models.solvers import SolverConfig
from sparse_phase.version import VERSION

_CLI_CONTEXT_SETTINGS = dict(help_option_names=["-h", "--help"])

console = Console()

# Matched against the lowercase values rather than the enum member names
METHOD_CHOICES = [method.value for method in SolverMethod]


def _reports_errors(command: Callable[..., Any]) -> Callable[..., Any]:
    """Turns library failures into a one line diagnostic and a nonzero exit code"""

    @functools.wraps(command)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return command(*args, **kwargs)
        except (SparsePhaseError, ValidationError) as e:
            raise click.ClickException(str(e)) from e

    return wrapper


def _harness_defaults(config: Config) -> dict[str, Any]:
    """Experiment values taken from the user's settings when neither the experiment file nor a flag sets them"""
    return {
        "mu": [config.harness.mu],
        "trials": config.harness.trials,
        "workers": config.harness.workers,
        "max_iter": config.harness.max_iter,
        "convergence_threshold": config.harness.convergence_threshold,
        "pwf_mu": config.solver.pwf_mu,
        "success_threshold": config.metrics.success_threshold,
        "psnr_log10": config.metrics.psnr_log10,
    }


def _default_output(config: Config, kind: ExperimentKind) -> Path:
    return config.harness.output_directory / f"{kind}.csv"


def _optional(value: Any) -> Any:
    """Wraps a single flag value into a one element grid axis"""
    return None if value is None else [value]


def _print_summary(spec: ExperimentSpec, summary: GridSummary) -> None:
    table = Table(title=f"{spec.kind} ({spec.trials} trials, seed {spec.master_seed})")
    for column in ("n", "m", "s", "sigma", "mu", "method", "success", "mean it", "max it", "mean s", "log err"):
        table.add_column(column, justify="right")
    if spec.kind == ExperimentKind.NOISE_SWEEP:
        table.add_column("SNR dB", justify="right")
    if spec.kind == ExperimentKind.TIMING:
        table.add_column("s to success", justify="right")
    if spec.kind == ExperimentKind.WAVELET_1D:
        table.add_column(f"PSNR (log{summary.psnr_log_base})", justify="right")

    for point in summary.points:
        row = [
            str(point.n),
            str(point.m),
            str(point.s),
            f"{point.sigma:g}",
            f"{point.mu:g}",
            str(point.method),
            f"{point.successes}/{point.trials}",
            "-" if point.mean_iterations is None else f"{point.mean_iterations:.1f}",
            "-" if point.max_iterations is None else str(point.max_iterations),
            "-" if point.mean_seconds is None else f"{point.mean_seconds:.4f}",
            f"{point.log_mean_relative_error:.2f}",
        ]
        if spec.kind == ExperimentKind.NOISE_SWEEP:
            row.append("-" if point.mean_snr_db is None else f"{point.mean_snr_db:.1f}")
        if spec.kind == ExperimentKind.TIMING:
            row.append("-" if point.mean_seconds_to_success is None else f"{point.mean_seconds_to_success:.4f}")
        if spec.kind == ExperimentKind.WAVELET_1D:
            row.append("-" if point.mean_psnr is None else f"{point.mean_psnr:.1f}")
        table.add_row(*row)

    console.print(table)
    console.print(f"Trial records: {spec.output_path}\nSummary: {spec.summary_path}")


def _run_and_report(spec: ExperimentSpec) -> None:
    _, summary = run_experiment(spec)
    _print_summary(spec, summary)


@click.group(context_settings=_CLI_CONTEXT_SETTINGS)
@click.version_option(VERSION, "--version", prog_name="sparse-phase")
@click.option("--verbose", "-v", is_flag=True, default=False, help="Mirror the log onto stderr")
def cli(verbose: bool) -> None:
    """Sparse phase retrieval solvers and the benchmark harness around them"""
    if verbose:
        attach_stream_handler()


@cli.command
@click.option("--n", "n", type=click.IntRange(min=1), default=2000, show_default=True, help="Signal length")
@click.option("--m", "m", type=click.IntRange(min=1), default=1500, show_default=True, help="Measurements")
@click.option("--s", "s", type=click.IntRange(min=1), default=20, show_default=True, help="Sparsity")
@click.option("--sigma", type=click.FloatRange(min=0), default=0.0, show_default=True, help="Noise level")
@click.option("--mu", type=click.FloatRange(min=0, min_open=True), help="Step size (defaults to the solver settings)")
@click.option("--method", type=click.Choice(METHOD_CHOICES), default=SolverMethod.HTP.value, show_default=True)
@click.option("--max-iter", type=click.IntRange(min=0), help="Iteration cap (defaults to the solver settings)")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Write the per-iteration trace as CSV")
@_reports_errors
def solve(
    n: int,
    m: int,
    s: int,
    sigma: float,
    mu: float | None,
    method: str,
    max_iter: int | None,
    seed: int,
    out: Path | None,
) -> None:
    """Solve a single random instance and print its iteration trace"""
    config = SparsePhaseContext.config
    rng = Rng(seed)
    signal = generate_signal(n, s, rng.child(SIGNAL_STREAM))
    ensemble = generate_ensemble(signal, m, sigma, rng.child(ENSEMBLE_STREAM))
    report = spectral_init(
        ensemble, s, rng.child(INIT_STREAM), tol=config.spectral.tol, max_iter=config.spectral.max_iter
    )
    cfg = SolverConfig.from_settings(s, config.solver, mu=mu, max_iter=max_iter)
    trace = run_solver(SolverMethod(method), ensemble, report.x0, cfg)

    table = Table(title=f"{method.upper()} on n={n} m={m} s={s} sigma={sigma:g} mu={cfg.mu:g}")
    for column in ("iteration", "residual", "relative error", "|S|", "seconds"):
        table.add_column(column, justify="right")
    errors = trace.relative_errors(signal.full)
    for k, (residual, error, support, seconds) in enumerate(
        zip(trace.residuals, errors, trace.supports, trace.per_iter_seconds), start=1
    ):
        table.add_row(str(k), f"{residual:.3e}", f"{error:.3e}", str(len(support)), f"{seconds:.5f}")
    console.print(table)

    assessment = assess(
        trace.final, signal.full, trace.iterations, trace.total_seconds, config.metrics.success_threshold
    )
    outcome = "[green]recovered[/green]" if assessment.success else "[red]not recovered[/red]"
    console.print(
        f"{outcome}: relative error {assessment.relative_error:.3e} after {trace.iterations} iterations "
        f"({trace.termination}), spectral start at {relative_error(report.x0, signal.full):.3e}"
    )
    if out is not None:
        emit_trace_csv(trace, out)
        console.print(f"Trace written to {out}")


@cli.command
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--seed", type=click.IntRange(min=0), help="Master seed")
@click.option("--trials", type=click.IntRange(min=1), help="Trials per grid point")
@click.option("--mu", type=click.FloatRange(min=0, min_open=True), help="Run every grid point with this step size")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Trial CSV (summary JSON goes beside it)")
@click.option("--workers", type=click.IntRange(min=1), help="Worker processes")
@click.option("--no-timings", is_flag=True, default=False, help="Write seconds as 0 for byte-identical reruns")
@_reports_errors
def bench(
    config_file: Path,
    seed: int | None,
    trials: int | None,
    mu: float | None,
    out: Path | None,
    workers: int | None,
    no_timings: bool,
) -> None:
    """Run the experiment described by CONFIG_FILE"""
    spec = load_spec_file(
        config_file,
        _harness_defaults(SparsePhaseContext.config),
        master_seed=seed,
        trials=trials,
        mu=_optional(mu),
        output_path=out,
        workers=workers,
        record_timings=False if no_timings else None,
    )
    _run_and_report(spec)


@cli.command
@click.option("--n", "n", type=click.IntRange(min=1), default=1000, show_default=True, help="Signal length")
@click.option("--m", "m", default="200,500,1000,1500", show_default=True, help="Comma separated measurement counts")
@click.option("--s", "s", default="20", show_default=True, help="Comma separated sparsity levels")
@click.option("--method", "methods", type=click.Choice(METHOD_CHOICES), multiple=True, help="Repeatable")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Master seed")
@click.option("--trials", type=click.IntRange(min=1), help="Trials per grid point")
@click.option("--mu", type=click.FloatRange(min=0, min_open=True), help="Step size")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Trial CSV (summary JSON goes beside it)")
@click.option("--workers", type=click.IntRange(min=1), help="Worker processes")
@_reports_errors
def grid(
    n: int,
    m: str,
    s: str,
    methods: tuple[str, ...],
    seed: int,
    trials: int | None,
    mu: float | None,
    out: Path | None,
    workers: int | None,
) -> None:
    """Success rate over a grid of measurement counts and sparsity levels (phase transition)"""
    config = SparsePhaseContext.config
    spec = build_spec(
        {"kind": ExperimentKind.PHASE_GRID, "n": n, "m": m, "s": s},
        _harness_defaults(config),
        methods=[SolverMethod(method) for method in methods] or None,
        master_seed=seed,
        trials=trials,
        mu=_optional(mu),
        output_path=out or _default_output(config, ExperimentKind.PHASE_GRID),
        workers=workers,
    )
    _run_and_report(spec)


@cli.command
@click.option("--n", "n", type=click.IntRange(min=1), default=1024, show_default=True, help="Signal length")
@click.option("--m", "m", type=click.IntRange(min=1), default=400, show_default=True, help="Measurements")
@click.option("--sigma", type=click.FloatRange(min=0), default=0.05, show_default=True, help="Noise level")
@click.option("--levels", type=click.IntRange(min=0), default=4, show_default=True, help="Haar decomposition levels")
@click.option("--psnr-log10/--psnr-ln", default=None, help="Logarithm used for PSNR (defaults to the metric settings)")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Master seed")
@click.option("--trials", type=click.IntRange(min=1), help="Trials")
@click.option("--mu", type=click.FloatRange(min=0, min_open=True), help="Step size")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="Trial CSV (summary JSON goes beside it)")
@click.option("--workers", type=click.IntRange(min=1), help="Worker processes")
@_reports_errors
def wavelet1d(
    n: int,
    m: int,
    sigma: float,
    levels: int,
    psnr_log10: bool | None,
    seed: int,
    trials: int | None,
    mu: float | None,
    out: Path | None,
    workers: int | None,
) -> None:
    """Recover the bundled 1-D signal from noisy phaseless measurements of its Haar coefficients"""
    config = SparsePhaseContext.config
    spec = build_spec(
        {"kind": ExperimentKind.WAVELET_1D, "n": n, "m": m, "sigma": sigma, "levels": levels},
        _harness_defaults(config),
        psnr_log10=psnr_log10,
        master_seed=seed,
        trials=trials,
        mu=_optional(mu),
        output_path=out or _default_output(config, ExperimentKind.WAVELET_1D),
        workers=workers,
    )
    _run_and_report(spec)


@cli.command
def dump_config():
    """Dump the current configuration, as it would be loaded by sparse-phase"""
    print(f"Config file location: {_CONFIG_FILE_LOCATION} (exists => {_CONFIG_FILE_LOCATION.exists()})")
    rich.print_json(Config.load_config().model_dump_json())


@cli.command
def clear_config():
    """Reset the user's settings"""
    _CONFIG_FILE_LOCATION.unlink(missing_ok=True)
    print("Your settings have been cleared")
