import itertools
import statistics

import numpy as np
import pytest
from pydantic import ValidationError

from sparse_phase.lib.config import SolverSettings
from sparse_phase.lib.constants import SolverMethod, Termination
from sparse_phase.lib.initialization import spectral_init
from sparse_phase.lib.measurements import INIT_STREAM
from sparse_phase.lib.metrics import relative_error
from sparse_phase.lib.solvers import (
    hard_threshold,
    htp_step,
    iht_step,
    pwf_gradient,
    pwf_step,
    solve,
)
from sparse_phase.models.signals import MeasurementEnsemble, Rng, SupportSet
from sparse_phase.models.solvers import SolverConfig
from tests.helpers import hand_ensemble


def _spectral_start(ensemble: MeasurementEnsemble, s: int, seed: int) -> np.ndarray:
    return spectral_init(ensemble, s, Rng(seed, INIT_STREAM)).x0


def test_hard_threshold_examples():
    np.testing.assert_array_equal(hard_threshold([3.0, -5.0, 1.0, 0.0], 2), [3.0, -5.0, 0.0, 0.0])
    np.testing.assert_array_equal(hard_threshold([0.0, 2.0, 0.0, -1.0], 3), [0.0, 2.0, 0.0, -1.0])
    np.testing.assert_array_equal(hard_threshold([1.0, -1.0, 1.0], 2), [1.0, -1.0, 0.0])
    np.testing.assert_array_equal(hard_threshold([1.0, 2.0], 0), [0.0, 0.0])


def test_hard_threshold_matches_subset_enumeration():
    for trial in range(100):
        gen = np.random.default_rng(trial)
        n = int(gen.integers(1, 11))
        s = int(gen.integers(0, min(4, n) + 1))
        v = gen.standard_normal(n)

        best, best_error = np.zeros(n), np.inf
        for subset in itertools.combinations(range(n), s):
            candidate = np.zeros(n)
            candidate[list(subset)] = v[list(subset)]
            error = np.linalg.norm(v - candidate)
            if error < best_error:
                best, best_error = candidate, error
        np.testing.assert_array_equal(hard_threshold(v, s), best)


def test_iht_step_by_hand():
    raw = np.array([[1.0, 2.0], [3.0, -1.0], [0.0, 1.0]])
    ensemble = hand_ensemble(raw, np.array([1.0, 0.0]))
    cfg = SolverConfig(s=1, mu=0.75)
    np.testing.assert_allclose(iht_step(ensemble, np.array([0.5, 0.5]), cfg), [1.875, 0.0], atol=1e-12)


def test_htp_step_matches_replay():
    gen = np.random.default_rng(21)
    raw = gen.standard_normal((24, 6))
    x_true = np.array([0.0, 1.5, 0.0, 0.0, -0.7, 0.0])
    ensemble = hand_ensemble(raw, x_true)
    cfg = SolverConfig(s=2, mu=0.75)
    x_k = x_true + 0.1 * gen.standard_normal(6)

    A, y = ensemble.A, ensemble.y_observed
    signed = y * np.sign(A @ x_k)
    proposal = x_k + 0.75 * A.T @ (signed - A @ x_k)
    support = np.sort(np.argsort(-np.abs(proposal))[:2])
    expected = np.zeros(6)
    expected[support] = np.linalg.lstsq(A[:, support], signed, rcond=None)[0]

    x_next, support_next = htp_step(ensemble, x_k, cfg)
    np.testing.assert_allclose(x_next, expected, atol=1e-10)
    assert list(support_next) == list(support)


@pytest.mark.parametrize("step", [htp_step, iht_step, pwf_step])
def test_signal_is_a_fixed_point(step, make_instance):
    signal, ensemble = make_instance(40, 120, 3, seed=1)
    result = step(ensemble, signal.full, SolverConfig(s=3))
    x_next = result[0] if isinstance(result, tuple) else result
    np.testing.assert_allclose(x_next, signal.full, atol=1e-10)


@pytest.mark.parametrize("method", list(SolverMethod))
def test_negated_start_negates_the_trace(method, make_instance):
    _, ensemble = make_instance(80, 200, 3, seed=5)
    x0 = _spectral_start(ensemble, 3, 5)
    cfg = SolverConfig(s=3, max_iter=8)
    forward = solve(method, ensemble, x0, cfg)
    backward = solve(method, ensemble, -x0, cfg)
    assert backward.termination == forward.termination
    assert backward.iterations == forward.iterations
    for x, x_negated in zip(forward.iterates, backward.iterates):
        np.testing.assert_allclose(x_negated, -x, atol=1e-12)
    np.testing.assert_allclose(backward.residuals, forward.residuals, atol=1e-12)


@pytest.mark.parametrize("method", list(SolverMethod))
def test_every_iterate_is_s_sparse(method, make_instance):
    _, ensemble = make_instance(100, 120, 6, seed=9)
    cfg = SolverConfig(s=6, max_iter=15)
    trace = solve(method, ensemble, _spectral_start(ensemble, 6, 9), cfg)
    assert trace.iterations >= 1
    assert all(np.count_nonzero(x) <= 6 for x in trace.iterates)
    assert all(len(support) <= 6 for support in trace.supports)


def test_pwf_gradient_matches_finite_differences():
    h = 1e-6
    for trial in range(50):
        gen = np.random.default_rng(1000 + trial)
        raw = gen.standard_normal((20, 6))
        ensemble = hand_ensemble(raw, gen.standard_normal(6))
        x = gen.standard_normal(6)

        def loss(v: np.ndarray) -> float:
            return 0.5 * float(np.sum(((ensemble.A @ v) ** 2 - ensemble.y_observed**2) ** 2))

        numeric = np.array([(loss(x + h * e) - loss(x - h * e)) / (2 * h) for e in np.eye(6)])
        analytic = pwf_gradient(ensemble, x)
        assert np.linalg.norm(numeric - analytic) <= 1e-5 * np.linalg.norm(analytic)


def test_pwf_stays_at_origin(make_instance):
    _, ensemble = make_instance(20, 40, 2)
    np.testing.assert_array_equal(pwf_gradient(ensemble, np.zeros(20)), 0)
    trace = solve(SolverMethod.PWF, ensemble, np.zeros(20), SolverConfig(s=2))
    assert trace.termination == Termination.ITERATE_STALLED
    np.testing.assert_array_equal(trace.final, 0)


def test_zero_iterations(make_instance):
    _, ensemble = make_instance(20, 40, 2)
    x0 = np.ones(20)
    trace = solve("htp", ensemble, x0, SolverConfig(s=2, max_iter=0))
    assert trace.iterations == 0
    assert trace.termination == Termination.MAX_ITER
    np.testing.assert_array_equal(trace.final, x0)


def test_exact_start_converges_immediately(make_instance):
    signal, ensemble = make_instance(50, 100, 4, seed=3)
    trace = solve(SolverMethod.HTP, ensemble, signal.full, SolverConfig(s=4))
    assert trace.iterations == 1
    assert trace.termination == Termination.RESIDUAL_CONVERGED
    assert trace.residuals[-1] <= 1e-10


def test_singular_system_ends_the_trace():
    A = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    x0 = np.array([1.0, 1.0, 0.0])
    y = np.abs(A @ x0)
    ensemble = MeasurementEnsemble(A, y, y.copy(), 0.0, 0)
    trace = solve(SolverMethod.HTP, ensemble, x0, SolverConfig(s=2))
    assert trace.termination == Termination.SINGULAR_SYSTEM
    assert trace.iterations == 0
    np.testing.assert_array_equal(trace.final, x0)


def test_htp_recovers_from_spectral_start(make_instance):
    recovered = 0
    for seed in range(10):
        signal, ensemble = make_instance(500, 400, 10, seed=seed)
        trace = solve(SolverMethod.HTP, ensemble, _spectral_start(ensemble, 10, seed), SolverConfig(s=10, mu=0.75))
        if trace.termination == Termination.RESIDUAL_CONVERGED:
            assert trace.residuals[-1] <= 1e-10
            assert trace.relative_errors(signal.full)[-1] <= 1e-8
            assert len(trace.supports[-1]) <= 10
            recovered += 1
    assert recovered >= 8


def test_htp_needs_fewer_iterations_than_iht(make_instance):
    htp, iht = [], []
    for seed in range(5):
        signal, ensemble = make_instance(500, 600, 10, seed=seed)
        x0 = _spectral_start(ensemble, 10, seed)
        cfg = SolverConfig(s=10, mu=0.75, max_iter=300)
        htp_count = solve(SolverMethod.HTP, ensemble, x0, cfg).iterations_to(signal.full, 1e-6)
        iht_count = solve(SolverMethod.IHT, ensemble, x0, cfg).iterations_to(signal.full, 1e-6)
        if htp_count is not None and iht_count is not None:
            htp.append(htp_count)
            iht.append(iht_count)
    assert len(htp) >= 3
    assert statistics.median(iht) > statistics.median(htp)


def test_trace_bookkeeping(make_instance):
    signal, ensemble = make_instance(60, 150, 3, seed=8)
    trace = solve(SolverMethod.IHT, ensemble, _spectral_start(ensemble, 3, 8), SolverConfig(s=3, max_iter=5))
    assert trace.iterations == len(trace.residuals) == len(trace.supports) == len(trace.per_iter_seconds)
    assert trace.iterations <= 5
    assert all(isinstance(support, SupportSet) for support in trace.supports)
    errors = trace.relative_errors(signal.full)
    assert trace.iterations_to(signal.full, errors[0]) == 1
    assert trace.iterations_to(signal.full, -1.0) is None


def test_solver_config_validation():
    with pytest.raises(ValidationError):
        SolverConfig(s=0)
    with pytest.raises(ValidationError):
        SolverConfig(s=2, mu=0.0)
    cfg = SolverConfig.from_settings(3, SolverSettings(), mu=None, max_iter=7)
    assert cfg.mu == pytest.approx(0.95)
    assert cfg.max_iter == 7
    with pytest.raises(ValidationError):
        cfg.s = 4


@pytest.mark.slow
def test_finite_step_recovery_at_desk_scale(make_instance):
    within, contracting = 0, 0
    htp_counts, iht_counts = [], []
    for seed in range(100):
        signal, ensemble = make_instance(2000, 1500, 20, seed=seed)
        x0 = _spectral_start(ensemble, 20, seed)
        cfg = SolverConfig(s=20, mu=0.75)
        trace = solve(SolverMethod.HTP, ensemble, x0, cfg)
        reached = trace.iterations_to(signal.full, 1e-10)
        within += reached is not None and reached <= 12

        errors = [relative_error(x0, signal.full), *trace.relative_errors(signal.full)]
        ratios = [b / a for a, b in zip(errors, errors[1:]) if a > 1e-10]
        contracting += all(r <= 0.95 for r in ratios)

        if seed < 20:
            htp_counts.append(trace.iterations_to(signal.full, 1e-6) or cfg.max_iter)
            iht_trace = solve(SolverMethod.IHT, ensemble, x0, cfg)
            iht_counts.append(iht_trace.iterations_to(signal.full, 1e-6) or cfg.max_iter)
    assert within >= 95
    assert contracting >= 95
    assert statistics.median(iht_counts) >= 3 * statistics.median(htp_counts)


def _median_htp_iteration_seconds(n: int, m: int, s: int, make_instance) -> float:
    tiny = 1e-300
    cfg = SolverConfig(s=s, mu=0.75, max_iter=10, stop_tol=tiny, residual_tol=tiny, stagnation_tol=tiny)
    seconds = []
    for seed in range(3):
        _, ensemble = make_instance(n, m, s, seed=seed)
        x0 = _spectral_start(ensemble, s, seed)
        seconds.extend(solve(SolverMethod.HTP, ensemble, x0, cfg).per_iter_seconds)
    return statistics.median(seconds)


@pytest.mark.slow
def test_htp_iteration_cost_follows_problem_size(make_instance):
    base = (1500, 1000, 20)
    doubled = (3000, 2000, 20)

    def cost(n: int, m: int, s: int) -> int:
        return m * n + s * s * m

    measured = _median_htp_iteration_seconds(*doubled, make_instance) / _median_htp_iteration_seconds(
        *base, make_instance
    )
    predicted = cost(*doubled) / cost(*base)
    assert predicted / 2 <= measured <= predicted * 2
