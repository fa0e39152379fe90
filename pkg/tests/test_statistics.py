"""Tests for goodness-of-fit helpers and report verdicts."""

import math

import numpy as np
import pytest
from scipy import stats

from core.statistics import chi2_binned, chi2_counts, ks_test, merge_bins, moment_compare, two_sample_z
from models.report import SuiteReport, TestReport, VerdictKind


class TestKolmogorovSmirnov:

    def test_accepts_matching_law(self, rng):
        report = ks_test(rng.exponential(size=5000), stats.expon.cdf, "expon", seed=3)
        assert report.passed
        assert report.sample_size == 5000
        assert report.seed == 3

    def test_rejects_wrong_law(self, rng):
        report = ks_test(rng.exponential(scale=2.0, size=5000), stats.expon.cdf)
        assert not report.passed
        assert report.p_value < 1e-6

    def test_too_few_samples(self, rng):
        report = ks_test(rng.exponential(size=20), stats.expon.cdf)
        assert not report.passed
        assert report.p_value is None
        assert "at least 100" in report.errors[0]

    def test_degenerate_samples(self):
        report = ks_test(np.ones(500), stats.expon.cdf)
        assert not report.passed
        assert "Degenerate" in report.errors[0]


class TestChiSquare:

    def test_merge_bins(self):
        obs, exp = merge_bins(np.array([1, 2, 10, 1, 1]), np.array([2.0, 3.0, 8.0, 1.0, 1.0]))
        np.testing.assert_array_equal(obs, [3, 12])
        np.testing.assert_allclose(exp, [5.0, 10.0])

    def test_merge_keeps_totals(self):
        observed = np.array([0, 1, 4, 40, 50, 3, 2])
        expected = np.array([0.5, 1.0, 4.0, 45.0, 45.0, 3.0, 1.5])
        obs, exp = merge_bins(observed, expected)
        assert obs.sum() == observed.sum()
        assert exp.sum() == pytest.approx(expected.sum())
        assert np.all(exp >= 5.0)

    def test_counts_rescaled(self):
        report = chi2_counts([250, 260, 240, 250], [1, 1, 1, 1])
        assert report.passed
        assert report.details['bins'] == 4

    def test_counts_reject(self):
        assert not chi2_counts([400, 100, 250, 250], [1, 1, 1, 1]).passed

    def test_counts_errors(self):
        assert "at least 100" in chi2_counts([10, 20], [1, 1]).errors[0]
        assert chi2_counts([100, 100], [1, -1]).errors
        assert "bins left" in chi2_counts([200], [1]).errors[0]

    def test_binned_against_density(self, rng):
        x = rng.gamma(2.0, size=20_000)
        edges = np.linspace(0.0, 20.0, 41)
        report = chi2_binned(x, lambda t: t * math.exp(-t), edges, "gamma2")
        assert report.passed
        assert report.test_id == "gamma2"


class TestMoments:

    def test_mean_matches(self, rng):
        report = moment_compare(rng.normal(1.0, 2.0, size=10_000), None, 1.0)
        assert report.kind is VerdictKind.TOLERANCE
        assert report.passed
        assert report.details['reference'] == 1.0

    def test_transformed_mean(self, rng):
        report = moment_compare(rng.normal(size=10_000), np.square, 1.5)
        assert not report.passed
        assert report.statistic > 4.0

    def test_two_sample_z(self, rng):
        a, b = rng.normal(size=4000), rng.normal(size=4000)
        assert abs(two_sample_z(a, b)) < 4.0
        assert two_sample_z(np.ones(10), np.ones(10)) == 0.0


class TestReports:

    def test_statistical_verdict(self):
        report = TestReport("t", VerdictKind.STATISTICAL, p_value=0.02, threshold=0.01).decide()
        assert report.passed
        assert not report.passes_at(0.05)

    def test_tolerance_verdict(self):
        assert TestReport("t", VerdictKind.TOLERANCE, statistic=1e-9, threshold=1e-8).decide().passed
        assert not TestReport("t", VerdictKind.TOLERANCE, statistic=math.nan, threshold=1.0).decide().passed

    def test_trajectory_needs_monotone(self):
        report = TestReport("t", VerdictKind.TRAJECTORY, statistic=1e-6, threshold=1e-4)
        assert not report.decide().passed
        report.details['monotone'] = True
        assert report.decide().passed

    def test_errors_fail(self):
        report = TestReport("t", VerdictKind.TOLERANCE, statistic=0.0, threshold=1.0)
        report.add_error("boom")
        assert not report.decide().passed
        assert report.verdict == "fail"

    def test_to_dict_is_json_ready(self):
        report = TestReport("t", VerdictKind.TOLERANCE, threshold=1.0, details={'x': np.float64(2.5)})
        data = report.to_dict()
        assert data['statistic'] == "nan"
        assert data['details']['x'] == 2.5
        assert data['kind'] == "tolerance"

    def test_bonferroni(self):
        reports = [TestReport(f"s{i}", VerdictKind.STATISTICAL, p_value=p, threshold=0.01).decide()
                   for i, p in enumerate((0.5, 0.004, 0.2, 0.9))]
        reports.append(TestReport("tol", VerdictKind.TOLERANCE, statistic=0.0, threshold=0.0).decide())
        suite = SuiteReport("quick", 1, 0.01, reports)
        assert suite.statistical_count == 4
        assert suite.corrected_significance == pytest.approx(0.0025)
        assert suite.passed
        assert "s1" in suite.passed_ids()
        assert suite.summary()['verdict'] == "pass"

    def test_suite_failure(self):
        reports = [TestReport("a", VerdictKind.STATISTICAL, p_value=1e-5, threshold=0.01).decide()]
        suite = SuiteReport("quick", 1, 0.01, reports)
        assert not suite.passed
        assert [r.test_id for r in suite.failures()] == ["a"]
        assert suite.summary()['failed'] == 1
