"""Tests for jump counts and the X0 estimators"""

import math

import numpy as np
import pytest

from subordination_lab.constants import MAX_CUTOFF, MIN_GOF_COUNTS
from subordination_lab.exceptions import ParameterError, RangeError, TruncationError
from subordination_lab.retrieval.counting import (
    CountRecord,
    RetrievalBatch,
    SumMode,
    brownian_cutoff,
    check_cutoff_guard,
    count_J,
    count_K,
    count_N,
    count_N_squared,
    decomposition_counts,
    default_exponent,
    estimate_x0,
    gamma_null_retrieve,
    in_hoelder_regime,
    lebesgue_cutoff,
    sandwich_counts,
    validate_exponent,
)
from subordination_lab.simulation.processes import AffineEvaluator, BrownianEvaluator, HoelderTestEvaluator
from subordination_lab.simulation.subordinators import JumpPath, StableConfig, sample_stable_jumps
from subordination_lab.simulation.timechange import JumpDeltas, jump_deltas_I, jump_deltas_Y
from subordination_lab.utils.stats import chi_square_poisson_gof


def dyadic_path(cutoff=1e-9):
    return JumpPath(
        horizon=1.0,
        cutoff=cutoff,
        times=np.array([0.1, 0.2, 0.5, 0.9]),
        sizes=np.array([2.0 ** -10, 2.0 ** -9, 2.0 ** -11, 0.125]),
        compensation_rate=0.0,
    )


def deltas_from(delta_Y, eps=1.0, cutoff=1e-12):
    delta_Y = np.asarray(delta_Y, dtype=float)
    count = delta_Y.size
    return JumpDeltas(
        eps=eps,
        cutoff=cutoff,
        s=np.linspace(0.1, eps, count),
        tau_minus=np.zeros(count),
        delta_tau=np.abs(delta_Y),
        delta_Y=delta_Y,
        x_min=np.sign(delta_Y),
        x_max=np.sign(delta_Y),
    )


class TestExponentsAndCutoffs:

    def test_default_exponent(self):
        assert default_exponent(0.5) == 5.0

    def test_exponent_must_exceed_bound(self):
        with pytest.raises(ParameterError):
            validate_exponent(0.5, 4.0)
        validate_exponent(0.5, 4.01)

    def test_lebesgue_cutoff(self):
        assert lebesgue_cutoff(0.5, 5.0, 2.0) == MAX_CUTOFF
        assert lebesgue_cutoff(0.01, 5.0, 1.0) == pytest.approx(1e-10)
        assert lebesgue_cutoff(0.01, 5.0, 0.0) == MAX_CUTOFF

    def test_brownian_cutoff(self):
        assert brownian_cutoff(0.01, 5.0, 2.0) == pytest.approx(1e-10 / 144.0)
        assert brownian_cutoff(0.01, 5.0, 2.0, z=1.0) == pytest.approx(1e-10 / 4.0)


class TestCountN:

    def test_strict_threshold(self):
        path = dyadic_path()
        # threshold 0.5^5 = 2^-5; b = 16 puts the second jump exactly on it
        assert count_N(path, 16.0, 0.5, 5.0) == 0
        assert count_N(path, 32.0, 0.5, 5.0) == 1

    def test_nonpositive_amplitude(self):
        assert count_N(dyadic_path(), 0.0, 0.5, 5.0) == 0
        assert count_N(dyadic_path(), -3.0, 0.5, 5.0) == 0

    def test_truncated_path_refuses(self):
        with pytest.raises(TruncationError) as info:
            count_N(dyadic_path(cutoff=0.01), 32.0, 0.5, 5.0)
        assert info.value.cutoff == 0.01
        assert info.value.required == pytest.approx(2.0 ** -10)

    def test_eps_past_horizon(self):
        with pytest.raises(RangeError):
            count_N(dyadic_path(), 1.0, 1.5, 5.0)

    def test_poisson_mean(self):
        cfg = StableConfig(0.5)
        rng = np.random.default_rng(5)
        eps, b, m = 0.1, 1.0, 5.0
        cutoff = lebesgue_cutoff(eps, m, b)
        counts = [count_N(sample_stable_jumps(cfg, eps, cutoff, rng), b, eps, m) for _ in range(1000)]
        lam = eps * cfg.jump_intensity(eps ** m / b)
        assert abs(np.mean(counts) - lam) < 5 * math.sqrt(lam / 1000)

    def test_poisson_law(self, rng):
        cfg = StableConfig(0.5)
        eps, b, m = 0.25, 2.0, 5.0
        cutoff = lebesgue_cutoff(eps, m, b)
        counts = [count_N(sample_stable_jumps(cfg, eps, cutoff, rng), b, eps, m) for _ in range(MIN_GOF_COUNTS)]
        lam = eps * cfg.jump_intensity(eps ** m / b)
        assert lam == pytest.approx(0.25 * math.sqrt(2.0 * 4.0 ** 5))
        assert chi_square_poisson_gof(counts, lam, level=1e-3).passed


class TestCountJ:

    def test_strict_and_signed(self):
        threshold = 0.5 ** 5
        deltas = deltas_from([threshold, 2 * threshold, -3 * threshold, -threshold], eps=0.5)
        assert count_J(deltas, 0.5, 5.0, '+') == 1
        assert count_J(deltas, 0.5, 5.0, '-') == 1
        assert count_J(deltas, 0.5, 5.0, -1) == 1

    def test_invalid_sign(self):
        with pytest.raises(ParameterError):
            count_J(deltas_from([1.0]), 1.0, 5.0, '*')

    def test_squared_needs_stochastic_increments(self):
        with pytest.raises(ParameterError):
            count_J(deltas_from([1.0]), 1.0, 5.0, squared=True)

    def test_restricted_to_earlier_eps(self):
        deltas = deltas_from([1.0, 1.0, 1.0, 1.0], eps=1.0)
        assert count_J(deltas, 0.5, 5.0) == 2
        with pytest.raises(RangeError):
            count_J(deltas, 2.0, 5.0)

    def test_sandwich(self, rng):
        path = sample_stable_jumps(StableConfig(0.5), 0.25, 1e-6, rng)
        deltas = jump_deltas_Y(HoelderTestEvaluator(0.5, 1.0, 1.0, 20.0), path, 0.25)
        lower, upper = sandwich_counts(deltas, 0.25, 5.0)
        assert lower <= count_J(deltas, 0.25, 5.0) <= upper

    def test_cutoff_guard(self):
        deltas = deltas_from([1.0, -4.0], cutoff=0.1)
        with pytest.raises(TruncationError):
            check_cutoff_guard(deltas, 0.5, 5.0)
        check_cutoff_guard(deltas_from([1.0, -4.0], cutoff=1e-6), 0.5, 5.0)


class TestEstimates:

    def test_lebesgue_scaling(self):
        # alpha 1/2, m 5: scaled = n^-1.5 J, estimate = scaled^2
        series = estimate_x0([(4, 16), (16, 128)], 0.5, 5.0)
        assert np.allclose(series.scaled_pos, [2.0, 2.0])
        assert np.allclose(series.estimate_pos, [4.0, 4.0])
        assert np.array_equal(series.J_neg, [0, 0])

    def test_stochastic_power(self):
        series = estimate_x0([(4, 16)], 0.5, 5.0, mode='stochastic', target=2.0)
        assert series.mode is SumMode.STOCHASTIC
        assert series.estimate_pos[0] == pytest.approx(2.0)
        assert series.last_relative_error() == pytest.approx(0.0)

    def test_count_records(self):
        records = [CountRecord(4, 16, 5.0, 0.5), CountRecord(16, 128, 5.0, 0.5)]
        assert records[0].scaled == pytest.approx(2.0)
        assert records[1].eps == 1.0 / 16
        assert np.allclose(estimate_x0(records, 0.5, 5.0).estimate_pos, 4.0)

    def test_rejects_mismatched_schedules(self):
        with pytest.raises(ParameterError):
            estimate_x0([(4, 1)], 0.5, 5.0, neg=[(8, 1)])

    def test_rejects_negative_counts(self):
        with pytest.raises(ParameterError):
            estimate_x0([(4, -1)], 0.5, 5.0)
        with pytest.raises(ParameterError):
            CountRecord(4, -1, 5.0, 0.5)

    def test_rejects_decreasing_schedule(self):
        with pytest.raises(ParameterError):
            estimate_x0([(16, 1), (4, 1)], 0.5, 5.0)

    def test_rows(self):
        rows = estimate_x0([(4, 16)], 0.5, 5.0, neg=[(4, 0)]).rows()
        assert rows[0]['J_pos'] == 16
        assert rows[0]['estimate_neg'] == 0.0

    def test_retrieves_constant(self):
        cfg = StableConfig(0.5)
        rng = np.random.default_rng(21)
        n, m, x0 = 1024.0, 5.0, 2.0
        eps = 1.0 / n
        path = sample_stable_jumps(cfg, eps, lebesgue_cutoff(eps, m, x0), rng)
        deltas = jump_deltas_Y(AffineEvaluator(x0), path, eps)
        series = estimate_x0([(n, count_J(deltas, eps, m, '+'))], 0.5, m,
                             neg=[(n, count_J(deltas, eps, m, '-'))], target=x0)
        assert series.estimate_pos[-1] == pytest.approx(x0, rel=0.05)
        assert series.estimate_neg[-1] == 0.0

    def test_retrieves_abs_value_from_stochastic_integral(self):
        cfg = StableConfig(0.5, 'brownian-tail')
        rng = np.random.default_rng(22)
        n, m, x0 = 256.0, 5.0, -3.0
        eps = 1.0 / n
        path = sample_stable_jumps(cfg, eps, brownian_cutoff(eps, m, abs(x0)), rng)
        deltas = jump_deltas_I(AffineEvaluator(x0), path, eps, rng)
        series = estimate_x0([(n, count_J(deltas, eps, m, squared=True))], 0.5, m, SumMode.STOCHASTIC)
        assert series.estimate_pos[-1] == pytest.approx(abs(x0), rel=0.05)
        assert count_N_squared(deltas, x0, eps, m) == count_J(deltas, eps, m, squared=True)


class TestRemainderCounts:

    def test_constant_has_no_remainder(self, rng):
        path = sample_stable_jumps(StableConfig(0.5), 0.25, 1e-6, rng)
        result = count_K(AffineEvaluator(2.0), path, 0.25, 5.0, 0.25, rng=rng)
        assert result.count == 0
        assert result.hoelder_regime

    def test_needs_stream_or_increments(self, rng):
        path = sample_stable_jumps(StableConfig(0.5), 0.25, 1e-6, rng)
        with pytest.raises(ParameterError):
            count_K(AffineEvaluator(2.0), path, 0.25, 5.0, 0.25)

    def test_reuses_increments(self, rng):
        path = sample_stable_jumps(StableConfig(0.5), 0.25, 1e-6, rng)
        evaluator = HoelderTestEvaluator(-3.0, 1.0)
        deltas = jump_deltas_I(evaluator, path, 0.25, rng, em_step=1e-3)
        result = count_K(evaluator, path, 0.25, 5.0, 0.25, deltas=deltas)
        expected = int(np.count_nonzero(deltas.remainder ** 2 > 0.25 * 0.25 ** 5))
        assert result.count == expected

    def test_hoelder_regime(self, rng):
        assert in_hoelder_regime(HoelderTestEvaluator(0.0, 0.5), 2.0)
        with pytest.raises(ParameterError):
            in_hoelder_regime(BrownianEvaluator(rng), 1.0)

    def test_decomposition_counts(self, rng):
        path = sample_stable_jumps(StableConfig(0.5), 0.25, 1e-6, rng)
        deltas = jump_deltas_I(AffineEvaluator(2.0), path, 0.25, rng)
        counts = decomposition_counts(deltas, 0.25, 5.0, 0.25)
        assert set(counts) == {'lead', 'drift', 'remainder'}
        assert counts['drift'] == 0 and counts['remainder'] == 0
        with pytest.raises(ParameterError):
            decomposition_counts(deltas, 0.25, 5.0, 0.5)


class TestBatches:

    def test_batch_medians(self):
        series = [estimate_x0([(4, j), (16, 8 * j)], 0.5, 5.0, target=1.0) for j in (8, 16, 24)]
        batch = RetrievalBatch(series)
        assert len(batch) == 3
        assert np.array_equal(batch.counts_at(16), [64, 128, 192])
        assert np.allclose(batch.median_estimate(), [4.0, 4.0])
        assert np.allclose(batch.median_abs_error(), [3.0, 3.0])
        assert np.allclose(batch.positive_fraction('-'), [0.0, 0.0])
        assert len(batch.summary_rows()) == 2
        with pytest.raises(ParameterError):
            batch.counts_at(8)

    def test_empty_batch(self):
        with pytest.raises(ParameterError):
            RetrievalBatch([])

    def test_gamma_null_is_deterministic(self):
        first = gamma_null_retrieve(1.0, (10, 100), 5.0, seed=3, replicates=8)
        second = gamma_null_retrieve(1.0, (10, 100), 5.0, seed=3, replicates=8, mapper=map)
        assert np.array_equal(first.counts(), second.counts())
        assert first.target == 1.0
        assert np.all(first.counts('-') == 0)

    def test_gamma_null_counts_vanish(self):
        batch = gamma_null_retrieve(2.0, (100, 10_000), 5.0, seed=4, replicates=200)
        # Poisson mean 1e-4 * E1(1e-20 / 2) is below 5e-3
        assert np.mean(batch.counts_at(10_000) > 0) < 0.05
        assert batch.median_estimate()[-1] == 0.0

    def test_gamma_null_rejects_nonpositive(self):
        with pytest.raises(ParameterError):
            gamma_null_retrieve(0.0, (10,), 5.0, seed=1, replicates=2)
