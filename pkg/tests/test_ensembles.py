"""Tests for the Wishart and Jacobi corners samplers."""

import numpy as np
import pytest
from scipy import stats

from conftest import TEST_SEED, WISHART_BETA1, WISHART_BETA2
from core.ensembles import (SampleBatch, expected_trace, jacobi_full_spectrum, sample_jacobi_batch,
                            sample_jacobi_conditional, sample_jacobi_multilevel, sample_jacobi_two_stage, sample_wishart_batch,
                            sample_wishart_multilevel, sample_wishart_two_stage)
from core.linalg import gaussian_entries
from models.params import JacobiParams, WishartParams
from utils.errors import ParameterError


@pytest.fixture
def wishart():
    return WishartParams(**WISHART_BETA2)


class TestWishart:

    @pytest.mark.parametrize("spec", [WISHART_BETA1, WISHART_BETA2])
    def test_levels_interlace(self, rng, spec):
        sample = sample_wishart_multilevel(WishartParams(**spec), 4, rng)
        assert [len(level) for level in sample.levels] == [1, 2, 2, 2]
        assert sample.check_interlacing(tol=1e-9)
        assert sample.in_support()

    def test_two_stage_interlaces(self, rng, wishart):
        sample = sample_wishart_two_stage(wishart, 3, rng)
        assert sample.depth == 3
        assert sample.check_interlacing(tol=1e-9)

    def test_two_stage_same_law(self, wishart):
        rng = np.random.default_rng(TEST_SEED)
        direct = [sample_wishart_multilevel(wishart, 2, rng).levels[1].values[0] for _ in range(2000)]
        staged = [sample_wishart_two_stage(wishart, 2, rng).levels[1].values[0] for _ in range(2000)]
        assert stats.ks_2samp(direct, staged).pvalue > 1e-3

    def test_batch_shapes(self, rng, wishart):
        levels = sample_wishart_batch(wishart, 3, 50, rng)
        assert [lvl.shape for lvl in levels] == [(50, 1), (50, 2), (50, 2)]
        assert np.all(np.diff(levels[2], axis=1) <= 0)

    @pytest.mark.parametrize("spec", [WISHART_BETA1, WISHART_BETA2])
    def test_expected_trace(self, rng, spec):
        p = WishartParams(**spec)
        traces = sample_wishart_batch(p, 3, 20_000, rng)[2].sum(axis=1)
        se = traces.std(ddof=1) / np.sqrt(traces.size)
        assert abs(traces.mean() - expected_trace(p, 3)) < 5 * se

    @pytest.mark.parametrize("beta,shape", [(2, 1.0), (1, 0.5)])
    def test_single_entry_law(self, beta, shape):
        p = WishartParams(beta, (1.5,), (0.5,))
        rate = 1.5 + 0.5
        first = sample_wishart_batch(p, 1, 4000, np.random.default_rng(TEST_SEED))[0][:, 0]
        # |A_11|^2: Exp(rate) for β=2, Gamma(1/2, rate/2) for β=1
        law = stats.gamma(shape, scale=1.0 / (shape * rate))
        assert stats.kstest(first, law.cdf).pvalue > 1e-3

    def test_permuting_pi_keeps_marginals(self):
        p = WishartParams(2, (1.0, 2.0, 4.0), (0.5, 0.25))
        swapped = WishartParams(2, (4.0, 1.0, 2.0), (0.5, 0.25))
        a = sample_wishart_batch(p, 3, 3000, np.random.default_rng(TEST_SEED))
        b = sample_wishart_batch(swapped, 3, 3000, np.random.default_rng(TEST_SEED + 1))
        for level in (1, 2):
            assert stats.ks_2samp(a[level][:, 0], b[level][:, 0]).pvalue > 1e-3
            assert stats.ks_2samp(a[level][:, -1], b[level][:, -1]).pvalue > 1e-3

    def test_expected_trace_formula(self):
        p = WishartParams(2, (1.0,), (1.0,))
        # rows: π̂ = 1 then zero-extended
        assert expected_trace(p, 2) == pytest.approx(0.5 + 1.0)

    def test_parameters_validated(self):
        with pytest.raises(ParameterError):
            WishartParams(3, (1.0,))
        with pytest.raises(ParameterError):
            WishartParams(1, (1.0, 0.0))
        with pytest.raises(ParameterError):
            WishartParams(1, (1.0,), (-0.5,))
        with pytest.raises(ParameterError):
            WishartParams(1, ())

    def test_invalid_depth(self, rng, wishart):
        with pytest.raises(ParameterError):
            sample_wishart_multilevel(wishart, 0, rng)


class TestJacobi:

    @pytest.mark.parametrize("beta", [1, 2])
    def test_levels_in_unit_interval(self, rng, beta):
        sample = sample_jacobi_multilevel(JacobiParams(beta, 5, 3, 3), rng)
        assert [len(level) for level in sample.levels] == [1, 2, 3]
        assert sample.in_support(upper=1.0)
        assert sample.check_interlacing(tol=1e-9)

    def test_batch(self, rng):
        levels = sample_jacobi_batch(JacobiParams(2, 4, 3, 3), 200, rng)
        assert [lvl.shape for lvl in levels] == [(200, 1), (200, 2), (200, 3)]
        assert np.all((levels[2] >= 0) & (levels[2] <= 1))
        assert np.all(levels[1][:, 0] >= levels[0][:, 0] - 1e-12)

    def test_principal_parameters(self):
        p = JacobiParams(1, 5, 3, 2)
        assert p.principal_pi == (5.0, 4.0, 3.0)
        assert p.principal_pi_hat() == (0.0, 1.0)
        assert p.theta == 0.5

    def test_conditional_route(self, rng):
        sample = sample_jacobi_conditional((3.0, 1.0, 0.5), 3, 2, 2, rng)
        assert sample.metadata["lambda_x"] == (3.0, 1.0, 0.5)
        assert sample.in_support(upper=1.0)
        with pytest.raises(ParameterError):
            sample_jacobi_conditional((3.0, 0.0, 0.5), 3, 2, 2, rng)
        with pytest.raises(ParameterError):
            sample_jacobi_conditional((3.0, 1.0), 3, 2, 2, rng)

    @pytest.mark.parametrize("beta", [1, 2])
    @pytest.mark.parametrize("m", [1, 2])
    def test_unit_eigenvalues(self, rng, beta, m):
        A, n = 5, 3
        X = gaussian_entries((A, n), beta, rng)
        Y = gaussian_entries((m, n), beta, rng)
        w = jacobi_full_spectrum(X, Y)
        assert w.shape == (n,)
        assert int(np.sum(np.abs(w - 1.0) < 1e-8)) == n - m

    def test_conditional_single_level_law(self):
        rng = np.random.default_rng(TEST_SEED)
        lam_x = 2.5
        tau = [1.0 / sample_jacobi_conditional((lam_x,), 1, 1, 2, rng).levels[0].values[0] - 1.0
               for _ in range(2000)]
        assert stats.kstest(tau, stats.expon(scale=1.0 / lam_x).cdf).pvalue > 1e-3

    def test_two_stage_same_law(self):
        p = JacobiParams(2, 4, 2, 1)
        rng = np.random.default_rng(TEST_SEED)
        direct = [sample_jacobi_multilevel(p, rng).levels[0].values[0] for _ in range(2000)]
        staged = [sample_jacobi_two_stage(p, rng).levels[0].values[0] for _ in range(2000)]
        assert stats.ks_2samp(direct, staged).pvalue > 1e-3

    def test_parameters_validated(self):
        with pytest.raises(ParameterError):
            JacobiParams(2, 2, 3, 1)
        with pytest.raises(ParameterError):
            JacobiParams(2, 4, 3, 4)


class TestSampleBatch:

    def test_tags_draws(self, config, wishart):
        samples = SampleBatch(config).run(wishart, 5, seed=3, m_max=2)
        assert [s.draw_index for s in samples] == list(range(5))
        assert all(s.seed == 3 for s in samples)

    def test_worker_count_does_not_change_draws(self, wishart):
        one = SampleBatch().run(wishart, 8, seed=5, workers=1, m_max=3)
        two = SampleBatch().run(wishart, 8, seed=5, workers=2, m_max=3)
        assert [s.levels for s in one] == [s.levels for s in two]

    def test_jacobi_uses_its_depth(self):
        samples = SampleBatch().run(JacobiParams(2, 4, 3, 2), 3, seed=1)
        assert all(s.depth == 2 for s in samples)

    def test_errors(self, wishart):
        with pytest.raises(ParameterError):
            SampleBatch().run(wishart, 3, seed=1)
        with pytest.raises(ParameterError):
            SampleBatch().run(wishart, -1, seed=1, m_max=2)
