"""Tests for the gamma change of measure and the stable/gamma contrast"""

import math

import numpy as np
import pytest

from subordination_lab.exceptions import DomainError, ParameterError
from subordination_lab.retrieval.quasi_invariance import (
    DensityRecord,
    rn_density,
    scheffe_gap,
    stable_contrast,
    verify_change_of_measure,
)


class TestDensity:

    def test_unit_scale_is_one(self):
        assert rn_density(1.0, 3.0, 2.5) == 1.0

    def test_zero_horizon(self):
        assert rn_density(2.0, 0.0, 0.0) == 1.0

    def test_value(self):
        assert rn_density(2.0, 1.0, 1.0) == pytest.approx(0.5 * math.exp(0.5))

    def test_vectorized(self):
        weights = rn_density(0.5, np.array([1.0, 2.0]), np.array([0.0, 1.0]))
        assert np.allclose(weights, [2.0, 4.0 * math.exp(-1.0)])

    def test_invalid_inputs(self):
        with pytest.raises(DomainError):
            rn_density(0.0, 1.0, 1.0)
        with pytest.raises(ParameterError):
            rn_density(2.0, -1.0, 1.0)
        with pytest.raises(ParameterError):
            rn_density(2.0, 1.0, -1.0)

    def test_record(self):
        record = DensityRecord.compute(2.0, 1.0, 1.0)
        assert record.density == pytest.approx(0.5 * math.exp(0.5))


class TestChangeOfMeasure:

    def test_reweighting_matches_scaled_moments(self, rng):
        report = verify_change_of_measure(0.5, 1.0, 40_000, rng)
        assert abs(report.mean_weight - 1.0) <= 5 * report.mean_weight_se
        assert abs(report.weighted_mean - report.expected_mean) <= 5 * report.weighted_mean_se
        assert abs(report.weighted_second - report.expected_second) <= 5 * report.weighted_second_se
        assert report.to_dict()['x'] == 0.5

    def test_rejects_bad_parameters(self, rng):
        with pytest.raises(DomainError):
            verify_change_of_measure(-1.0, 1.0, 100, rng)
        with pytest.raises(ParameterError):
            verify_change_of_measure(2.0, 0.0, 100, rng)


class TestScheffeGap:

    def test_gap_shrinks_with_horizon(self, rng):
        gap = scheffe_gap(2.0, (1.0, 0.1, 0.01), 5000, rng)
        assert all(0.0 <= g <= 2.0 for g in gap.gaps)
        assert gap.gaps[0] > gap.gaps[1] > gap.gaps[2]
        assert gap.decreasing
        assert len(gap.rows()) == 3
        assert math.isnan(gap.rows()[-1]['step_z'])

    def test_gap_is_small_at_short_horizon(self, rng):
        gap = scheffe_gap(2.0, (0.01, 0.001), 20_000, rng)
        assert gap.gaps[-1] < 0.05
        assert gap.gaps[-1] + 3 * gap.se[-1] < 0.05

    def test_unit_scale_has_no_gap(self, rng):
        gap = scheffe_gap(1.0, (1.0, 0.1), 100, rng)
        assert gap.gaps == [0.0, 0.0]

    def test_schedule_must_decrease(self, rng):
        with pytest.raises(ParameterError):
            scheffe_gap(2.0, (0.1, 1.0), 100, rng)
        with pytest.raises(ParameterError):
            scheffe_gap(2.0, (), 100, rng)


class TestContrast:

    def test_stable_separates_and_gamma_does_not(self, rng):
        report = stable_contrast(1.0, 4.0, 0.05, 5.0, 400, rng)
        assert report.lambda_stable[1] == pytest.approx(2.0 * report.lambda_stable[0])
        assert report.accuracy_stable > 0.9
        assert report.oracle_gamma < 0.6
        assert report.accuracy_gamma < 0.62

    def test_gamma_counts_do_not_tell_one_from_two(self, rng):
        report = stable_contrast(1.0, 2.0, 0.01, 5.0, 1000, rng)
        # E1(1e-10) and E1(5e-11) differ by log 2, so the gamma rates almost coincide
        assert report.lambda_gamma[1] - report.lambda_gamma[0] == pytest.approx(0.01 * math.log(2.0), rel=1e-6)
        assert report.oracle_gamma < 0.52
        assert abs(report.accuracy_gamma - 0.5) < 4 * math.sqrt(0.25 / 1000)
        assert report.accuracy_stable > 0.95

    def test_invalid_scales(self, rng):
        with pytest.raises(ParameterError):
            stable_contrast(0.0, 4.0, 0.05, 5.0, 10, rng)
        with pytest.raises(ParameterError):
            stable_contrast(1.0, 4.0, 2.0, 5.0, 10, rng)
