"""Tests for the statistical test kit and the random streams"""

import numpy as np
import pytest

from subordination_lab.exceptions import ParameterError
from subordination_lab.utils.random_streams import Stream, derive_seed, experiment_rng, replicate_rng
from subordination_lab.utils.stats import (
    binned_contrast,
    chi_square_poisson_gof,
    ecdf,
    ks_critical_value,
    ks_two_sample,
    log_log_slope,
    mean_and_se,
    pool_poisson_cells,
    poisson_bayes_accuracy,
    quantiles,
    within_sigma,
)


class TestKolmogorovSmirnov:

    def test_critical_value(self):
        assert ks_critical_value(0.01) == pytest.approx(1.6276, abs=1e-4)
        with pytest.raises(ParameterError):
            ks_critical_value(0.0)

    def test_same_law_passes(self, rng):
        report = ks_two_sample(rng.standard_normal(2000), rng.standard_normal(2000), level=0.001)
        assert report.passed
        assert report.sample_sizes == (2000, 2000)

    def test_shifted_law_fails(self, rng):
        report = ks_two_sample(rng.standard_normal(2000), 0.5 + rng.standard_normal(2000))
        assert not report.passed
        assert report.statistic > report.threshold

    def test_empty_sample(self):
        with pytest.raises(ParameterError):
            ks_two_sample([], [1.0])


class TestPoissonGoodnessOfFit:

    def test_poisson_counts_pass(self, rng):
        report = chi_square_poisson_gof(rng.poisson(3.0, 5000), 3.0, level=0.001)
        assert report.passed
        assert report.extra['cells'] >= 2

    def test_wrong_law_fails(self):
        report = chi_square_poisson_gof(np.full(1000, 3), 3.0)
        assert not report.passed

    def test_zero_mean(self):
        assert chi_square_poisson_gof(np.zeros(500, dtype=int), 0.0).passed
        assert not chi_square_poisson_gof(np.r_[np.zeros(499, dtype=int), 1], 0.0).passed

    def test_needs_enough_counts(self):
        with pytest.raises(ParameterError):
            chi_square_poisson_gof(np.zeros(10, dtype=int), 1.0)

    def test_pooling_keeps_totals(self, rng):
        counts = rng.poisson(2.0, 800)
        observed, expected = pool_poisson_cells(counts, 2.0)
        assert observed.sum() == 800
        assert expected.sum() == pytest.approx(800.0)
        assert np.all(expected >= 5.0)


class TestHelpers:

    def test_ecdf(self):
        F = ecdf([3.0, 1.0, 2.0, 2.0])
        assert F(2.0) == 0.75
        assert F(0.5) == 0.0
        assert np.allclose(F([1.0, 3.0]), [0.25, 1.0])
        assert F.size == 4

    def test_quantiles(self):
        assert np.allclose(quantiles(np.arange(101), [0.5, 0.9]), [50.0, 90.0])

    def test_mean_and_se(self):
        mean, se = mean_and_se([1.0, 3.0])
        assert mean == 2.0
        assert se == pytest.approx(1.0)

    def test_within_sigma(self):
        assert within_sigma(1.0, 1.2, 0.1)
        assert not within_sigma(1.0, 1.4, 0.1)
        assert within_sigma(2.0, 2.0, 0.0)
        assert not within_sigma(2.0, 2.1, 0.0)

    def test_log_log_slope(self):
        x = np.array([1.0, 2.0, 4.0, 8.0])
        assert log_log_slope(x, x ** -2.0) == pytest.approx(-2.0)
        assert np.isnan(log_log_slope(x, np.zeros(4)))

    def test_bayes_accuracy(self):
        assert poisson_bayes_accuracy(1.0, 1.0) == 0.5
        assert poisson_bayes_accuracy(1.0, 100.0) == pytest.approx(1.0)
        assert 0.5 < poisson_bayes_accuracy(1.0, 2.0) < 1.0


class TestBinnedContrast:

    def test_detects_dependence(self, rng):
        condition = rng.random(20_000)
        covariate = rng.random(20_000)
        target = condition + 0.5 * covariate + 0.1 * rng.standard_normal(20_000)
        assert binned_contrast(condition, covariate, target).detected()

    def test_conditional_independence(self, rng):
        condition = rng.random(20_000)
        covariate = rng.random(20_000)
        target = condition + 0.1 * rng.standard_normal(20_000)
        result = binned_contrast(condition, covariate, target)
        assert abs(result.z) < 4.0
        assert len(result.bin_z) == 10

    def test_needs_enough_samples(self):
        with pytest.raises(ParameterError):
            binned_contrast(np.zeros(50), np.zeros(50), np.zeros(50), bins=10)


class TestRandomStreams:

    def test_replicate_streams_are_reproducible(self):
        a = replicate_rng(1, 5, Stream.CLOCK, 2).random(3)
        b = replicate_rng(1, 5, Stream.CLOCK, 2).random(3)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        clock = replicate_rng(1, 5, Stream.CLOCK).random()
        driver = replicate_rng(1, 5, Stream.DRIVER).random()
        other = replicate_rng(1, 6, Stream.CLOCK).random()
        assert len({clock, driver, other}) == 3

    def test_experiment_stream_differs_from_replicates(self):
        assert experiment_rng(1).random() != replicate_rng(1, 0).random()

    def test_derive_seed(self):
        assert derive_seed(9, 1) == derive_seed(9, 1)
        assert derive_seed(9, 1) != derive_seed(9, 2)
        assert isinstance(derive_seed(9), int)
