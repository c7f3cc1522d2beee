"""
Runs the benchmark experiments: every (grid point, trial) pair becomes an independent task that owns its random
streams, so results are identical whether trials run inline or across a process pool.
"""

import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from itertools import accumulate, groupby, repeat

import numpy as np

from sparse_phase.lib.constants import ExperimentKind
from sparse_phase.lib.harness.output import emit_csv, emit_summary_json, ensure_writable
from sparse_phase.lib.initialization import spectral_init
from sparse_phase.lib.logging import lg
from sparse_phase.lib.measurements import (
    ENSEMBLE_STREAM,
    INIT_STREAM,
    SIGNAL_STREAM,
    ensemble_from_matrix,
    generate_ensemble,
    generate_signal,
    trial_seed,
)
from sparse_phase.lib.metrics import assess, relative_error, snr_db
from sparse_phase.lib.solvers import solve
from sparse_phase.lib.wavelet import WaveletPlan, bundled_coefficients, compose_sensing, haar_inverse
from sparse_phase.models.experiments import ExperimentSpec, GridPoint, GridPointSummary, GridSummary, TrialRecord
from sparse_phase.models.signals import MeasurementEnsemble, Rng, SparseSignal
from sparse_phase.models.solvers import SolverConfig

# Guards log(0) when every trial recovers the signal to machine precision
_ERROR_FLOOR = np.finfo(np.float64).tiny


def seed_for(spec: ExperimentSpec, point: GridPoint, trial: int) -> int:
    """The per-trial seed, shared by all methods so that they see the same instance"""
    return trial_seed(spec.master_seed, str(spec.kind), point.n, point.m, point.s, point.sigma, point.mu, trial)


def build_instance(spec: ExperimentSpec, point: GridPoint, rng: Rng) -> tuple[SparseSignal, MeasurementEnsemble]:
    if spec.kind == ExperimentKind.WAVELET_1D:
        # Unknowns are the Haar coefficients c; the sensing matrix is A = G W^{-1} so that |A c| = |G x|
        plan = WaveletPlan(point.n, spec.levels)
        signal = SparseSignal.from_dense(bundled_coefficients(plan))
        generator = rng.child(ENSEMBLE_STREAM).generator()
        gaussian = generator.standard_normal((point.m, point.n))
        return signal, ensemble_from_matrix(signal, compose_sensing(gaussian, plan), point.sigma, rng.seed, generator)

    signal = generate_signal(point.n, point.s, rng.child(SIGNAL_STREAM))
    return signal, generate_ensemble(signal, point.m, point.sigma, rng.child(ENSEMBLE_STREAM))


def _seconds_to(errors: list[float], elapsed: list[float], threshold: float) -> float | None:
    """Cumulative time at the first iterate whose relative error is within the threshold"""
    return next((t for error, t in zip(errors, elapsed) if error <= threshold), None)


def run_trial(spec: ExperimentSpec, point: GridPoint, trial: int) -> list[TrialRecord]:
    """One instance, one spectral initialization, then every requested method from the same starting point"""
    seed = seed_for(spec, point, trial)
    rng = Rng(seed)
    signal, ensemble = build_instance(spec, point, rng)

    init_started = time.perf_counter()
    report = spectral_init(ensemble, point.s, rng.child(INIT_STREAM))
    init_seconds = time.perf_counter() - init_started
    init_error = relative_error(report.x0, signal.full)

    synthesis = None
    if spec.kind == ExperimentKind.WAVELET_1D:
        synthesis = partial(haar_inverse, plan=WaveletPlan(point.n, spec.levels))

    records: list[TrialRecord] = []
    for method in spec.methods:
        cfg = SolverConfig(s=point.s, mu=point.mu, pwf_mu=spec.pwf_mu, max_iter=spec.max_iter)
        solve_started = time.perf_counter()
        trace = solve(method, ensemble, report.x0, cfg)
        seconds = init_seconds + (time.perf_counter() - solve_started)

        errors = [init_error, *trace.relative_errors(signal.full)]
        elapsed = list(accumulate(trace.per_iter_seconds, initial=init_seconds))
        converged_at = trace.iterations_to(signal.full, spec.convergence_threshold)
        iterations = converged_at if converged_at is not None else trace.iterations
        assessment = assess(
            trace.final,
            signal.full,
            iterations,
            seconds,
            spec.success_threshold,
            with_psnr=synthesis is not None,
            psnr_log10=spec.psnr_log10,
            synthesis=synthesis,
        )

        record = TrialRecord(
            kind=spec.kind,
            n=point.n,
            m=point.m,
            s=point.s,
            sigma=point.sigma,
            mu=point.mu,
            method=method,
            trial=trial,
            seed=seed,
            iterations=iterations,
            seconds=seconds if spec.record_timings else 0.0,
            relative_error=assessment.relative_error,
            success=assessment.success,
            termination=trace.termination,
            converged=converged_at is not None,
            init_relative_error=init_error,
            psnr=assessment.psnr,
        )
        match spec.kind:
            case ExperimentKind.ITER_TRACE:
                record.error_curve = errors
            case ExperimentKind.TIMING:
                if not spec.record_timings:
                    elapsed = [0.0] * len(elapsed)
                record.error_curve = errors
                record.time_curve = elapsed
                record.seconds_to_success = _seconds_to(errors, elapsed, spec.success_threshold)
            case ExperimentKind.NOISE_SWEEP:
                record.snr_db = snr_db(ensemble.y_clean, ensemble.noise)
        records.append(record)
    return records


def _padded_mean(curves: list[list[float]]) -> list[float]:
    """Mean over trials of the value after k iterations; a finished trial keeps its last value"""
    if not curves or not all(curves):
        return []
    length = max(len(c) for c in curves)
    padded = np.array([c + [c[-1]] * (length - len(c)) for c in curves])
    return [float(v) for v in padded.mean(axis=0)]


def _log_mean(values: list[float]) -> float:
    return math.log(max(statistics.fmean(values), _ERROR_FLOOR))


def summarize_point(records: list[TrialRecord]) -> GridPointSummary:
    first = records[0]
    successes = [r for r in records if r.success]
    converged = [r.iterations for r in records if r.converged]
    unconverged = [r.iterations for r in records if not r.converged]
    snrs = [r.snr_db for r in records if r.snr_db is not None and math.isfinite(r.snr_db)]
    psnrs = [r.psnr for r in records if r.psnr is not None]
    finite_psnrs = [p for p in psnrs if math.isfinite(p)]
    to_success = [r.seconds_to_success for r in successes if r.seconds_to_success is not None]

    # Timing curves follow successful trials only, the others are reported through the success rate
    curve_records = successes if first.kind == ExperimentKind.TIMING else records
    return GridPointSummary(
        n=first.n,
        m=first.m,
        s=first.s,
        sigma=first.sigma,
        mu=first.mu,
        method=first.method,
        trials=len(records),
        successes=len(successes),
        failures=len(records) - len(successes),
        success_rate=len(successes) / len(records),
        converged=len(converged),
        mean_iterations=statistics.fmean(converged) if converged else None,
        median_iterations=statistics.median(converged) if converged else None,
        max_iterations=max(converged) if converged else None,
        max_unconverged_iterations=max(unconverged) if unconverged else None,
        mean_seconds=statistics.fmean(r.seconds for r in successes) if successes else None,
        mean_seconds_to_success=statistics.fmean(to_success) if to_success else None,
        log_mean_relative_error=_log_mean([r.relative_error for r in records]),
        mean_snr_db=statistics.fmean(snrs) if snrs else None,
        mean_psnr=statistics.fmean(finite_psnrs) if finite_psnrs else None,
        min_psnr=min(psnrs) if psnrs else None,
        error_curve=[math.log(max(v, _ERROR_FLOOR)) for v in _padded_mean([r.error_curve for r in curve_records])],
        time_curve=_padded_mean([r.time_curve for r in curve_records]),
    )


def summarize(spec: ExperimentSpec, records: list[TrialRecord]) -> GridSummary:
    """Aggregates sorted records per (grid point, method)"""
    by_point = sorted(records, key=lambda r: (r.point, str(r.method), r.trial))
    points = [
        summarize_point(list(group)) for _, group in groupby(by_point, key=lambda r: (r.point, str(r.method)))
    ]
    return GridSummary(
        kind=spec.kind,
        master_seed=spec.master_seed,
        trials=spec.trials,
        psnr_log_base="10" if spec.psnr_log10 else "e",
        points=points,
    )


def collect_records(spec: ExperimentSpec) -> list[TrialRecord]:
    """Runs every trial of the experiment and returns the records sorted by coordinates"""
    tasks = [(point, trial) for point in spec.grid() for trial in range(spec.trials)]
    lg.info(f"Running {spec.kind} experiment: {len(tasks)} trials on {spec.workers} worker(s)")

    if spec.workers == 1:
        batches = [run_trial(spec, point, trial) for point, trial in tasks]
    else:
        points = [point for point, _ in tasks]
        trials = [trial for _, trial in tasks]
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            batches = list(pool.map(run_trial, repeat(spec), points, trials, chunksize=max(1, len(tasks) // 64)))

    records = [record for batch in batches for record in batch]
    records.sort(key=lambda r: r.sort_key)
    return records


def run_experiment(spec: ExperimentSpec) -> tuple[list[TrialRecord], GridSummary]:
    """
    Runs the experiment and writes the trial CSV to spec.output_path and the summary JSON next to it. The output
    location is checked before anything is computed.
    """
    ensure_writable(spec.output_path)
    ensure_writable(spec.summary_path)

    records = collect_records(spec)
    summary = summarize(spec, records)
    for point in summary.points:
        lg.info(
            f"n={point.n} m={point.m} s={point.s} sigma={point.sigma} mu={point.mu} {point.method}: "
            f"success {point.successes}/{point.trials}, converged {point.converged}, "
            f"max iterations {point.max_iterations}"
        )

    emit_csv(records, spec.output_path)
    emit_summary_json(summary, spec.summary_path)
    return records, summary

