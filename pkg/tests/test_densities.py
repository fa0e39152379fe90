"""Tests for ensemble densities and the Wishart transition kernels."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from core.densities import (NormalizationCache, as_level_arrays, chain_log_constant, interlacing_mask,
                            log_kernel_wishart, log_kernel_wishart_ordinary, logdens_ho_joint, logdens_jacobi,
                            logdens_mvb_joint, logdens_mvb_marginal, logdens_wishart_eigen,
                            transform_jacobi_to_ho)
from models.params import JacobiParams, WishartParams
from models.spectra import LogValue, MultilevelSample
from utils.errors import ParameterError, ValidationError

# interlacing configurations with n = 2, m = 3
CONFIGS = [
    [[1.2], [2.0, 0.5], [3.1, 0.9]],
    [[0.4], [0.9, 0.3], [1.5, 0.35]],
    [[2.5], [4.0, 1.0], [4.2, 1.3]],
]


def _batch(configs):
    return [np.array([cfg[l] for cfg in configs]) for l in range(len(configs[0]))]


class TestSupport:

    def test_mask(self):
        levels = _batch(CONFIGS + [[[2.5], [2.0, 0.5], [3.1, 0.9]]])
        np.testing.assert_array_equal(interlacing_mask(levels), [True, True, True, False])

    def test_upper_bound(self):
        assert not interlacing_mask([np.array([[1.2]])], upper=1.0)[0]

    def test_off_support_is_minus_infinity(self):
        p = WishartParams(2, (1.0, 2.0), (0.5,))
        value = logdens_mvb_joint([[0.3], [0.2, 0.1], [0.5, 0.05]], p)
        assert value.is_zero
        assert log_kernel_wishart([0.3], [0.5, -0.1], 2, p).is_zero

    def test_level_lengths_checked(self):
        p = WishartParams(2, (1.0, 2.0))
        with pytest.raises(ValidationError):
            logdens_mvb_joint([[1.0, 0.5], [2.0, 0.3]], p)
        with pytest.raises(ValidationError):
            log_kernel_wishart([1.0, 0.5], [2.0, 0.3], 2, p)
        with pytest.raises(ParameterError):
            log_kernel_wishart([], [1.0], 0, p)

    def test_batch_rows_must_agree(self):
        with pytest.raises(ValidationError):
            as_level_arrays([np.zeros((2, 1)), np.zeros((3, 2))])

    def test_single_and_sample_inputs(self):
        p = WishartParams(2, (1.0, 2.0), (0.5,))
        single = logdens_mvb_joint(CONFIGS[0], p)
        sample = MultilevelSample(CONFIGS[0], 2)
        assert isinstance(single, LogValue)
        assert logdens_mvb_joint(sample, p).log_magnitude == pytest.approx(single.log_magnitude, abs=1e-12)
        batch = logdens_mvb_joint(_batch(CONFIGS), p)
        assert batch.shape == (3,)
        assert batch[0] == pytest.approx(single.log_magnitude, abs=1e-12)


class TestKernels:

    def test_first_level_beta2_is_exponential(self):
        p = WishartParams(2, (1.0,), (0.5,))
        x = np.array([[0.3], [1.7]])
        values = log_kernel_wishart(np.zeros((2, 0)), x, 1, p)
        np.testing.assert_allclose(values, math.log(1.5) - 1.5 * x[:, 0], atol=1e-12)

    def test_first_level_beta1_is_scaled_chi_square(self):
        p = WishartParams(1, (1.0,), (0.5,))
        x = np.array([[0.3], [1.7]])
        values = log_kernel_wishart(np.zeros((2, 0)), x, 1, p)
        np.testing.assert_allclose(values, stats.gamma.logpdf(x[:, 0], 0.5, scale=2 / 1.5), atol=1e-12)

    def test_saturated_beta1_jump(self):
        # n = 1: μ^2 - μ^1 is a scaled χ² with one degree of freedom
        p = WishartParams(1, (1.0,), (0.5, 0.25))
        c = 1.25
        value = log_kernel_wishart([0.4], [1.1], 2, p)
        assert value.log_magnitude == pytest.approx(stats.gamma.logpdf(0.7, 0.5, scale=2 / c), abs=1e-12)

    def test_saturated_beta2_jump(self):
        p = WishartParams(2, (1.0,), (0.5, 0.25))
        value = log_kernel_wishart([0.4], [1.1], 2, p)
        assert value.log_magnitude == pytest.approx(math.log(1.25) - 1.25 * 0.7, abs=1e-12)

    @pytest.mark.slow
    def test_growing_level_normalized(self):
        p = WishartParams(2, (1.0, 2.0), (0.5, 0.25))
        a = 0.8

        def density(x2, x1):
            return math.exp(log_kernel_wishart([a], [x1, x2], 2, p).log_magnitude)

        total, _ = integrate.dblquad(density, a, np.inf, 0.0, a, epsabs=1e-9, epsrel=1e-7)
        assert total == pytest.approx(1.0, rel=1e-5)

    @pytest.mark.parametrize("beta", [1, 2])
    def test_chain_matches_joint(self, beta):
        p = WishartParams(beta, (1.0, 2.0), (0.5, 0.25))
        levels = _batch(CONFIGS)
        chain = np.zeros(len(CONFIGS))
        prev = np.zeros((len(CONFIGS), 0))
        for m, nxt in enumerate(levels, start=1):
            chain += log_kernel_wishart(prev, nxt, m, p)
            prev = nxt
        joint = logdens_mvb_joint(levels, p)
        np.testing.assert_allclose(chain - joint, chain_log_constant(p, 3), atol=1e-5)

    def test_ordinary_kernel_matches_general(self):
        p = WishartParams(1, (1.0, 1.0))
        levels = _batch(CONFIGS)
        prev = np.zeros((len(CONFIGS), 0))
        for m, nxt in enumerate(levels, start=1):
            general = log_kernel_wishart(prev, nxt, m, p)
            ordinary = log_kernel_wishart_ordinary(prev, nxt, m, p.n)
            np.testing.assert_allclose(general, ordinary, atol=1e-8)
            prev = nxt

    def test_chain_constant_vanishes_for_complex(self):
        assert chain_log_constant(WishartParams(2, (1.0, 2.0)), 3) == 0.0


class TestMarginals:

    def test_first_level_marginal_matches_kernel(self):
        p = WishartParams(2, (1.0,), (0.5,))
        value = logdens_mvb_marginal([0.9], 1, p)
        assert value.log_magnitude == pytest.approx(math.log(1.5) - 1.5 * 0.9, abs=1e-12)

    def test_joint_and_marginal_agree_on_one_level(self):
        p = WishartParams(2, (1.0, 2.0), (0.5,))
        joint = logdens_mvb_joint([[0.7]], p)
        marginal = logdens_mvb_marginal([0.7], 1, p)
        assert joint.log_magnitude == pytest.approx(marginal.log_magnitude, abs=1e-6)

    def test_marginal_length_checked(self):
        with pytest.raises(ValidationError):
            logdens_mvb_marginal([1.0], 2, WishartParams(2, (1.0, 2.0)))

    @pytest.mark.parametrize("beta,A,shape", [(2, 3, 3.0), (1, 4, 2.0)])
    def test_wishart_eigen_single_column(self, beta, A, shape):
        x = np.array([[0.3], [1.1], [2.6]])
        values = logdens_wishart_eigen(x, A, 1, beta)
        rate = 1.0 if beta == 2 else 0.5
        offset = values - stats.gamma.logpdf(x[:, 0], shape, scale=1 / rate)
        assert np.ptp(offset) < 1e-12


class TestJacobi:

    @pytest.mark.parametrize("beta,A,n,a,b", [(2, 4, 3, 2.0, 3.0), (1, 5, 3, 1.5, 1.5)])
    def test_first_level_is_beta_law(self, beta, A, n, a, b):
        x = np.array([[0.1], [0.45], [0.8]])
        values = logdens_jacobi([x], JacobiParams(beta, A, n, 1))
        offset = values - stats.beta.logpdf(x[:, 0], a, b)
        assert np.ptp(offset) < 1e-12

    def test_outside_unit_interval(self):
        assert logdens_jacobi([[1.2]], JacobiParams(2, 4, 3, 1)).is_zero

    def test_level_lengths_checked(self):
        with pytest.raises(ValidationError):
            logdens_jacobi([[0.5, 0.2]], JacobiParams(2, 4, 3, 1))
        with pytest.raises(ValidationError):
            logdens_jacobi([[0.5], [0.6, 0.2], [0.7, 0.4, 0.1]], JacobiParams(2, 4, 2, 2))

    def test_transform(self):
        sample = MultilevelSample([[0.5], [0.8, 0.25]], 2, model="jacobi", seed=4, draw_index=1)
        mu, log_jac = transform_jacobi_to_ho(sample)
        assert mu.levels[1].values == pytest.approx((-math.log(0.25), -math.log(0.8)))
        assert log_jac == pytest.approx(math.log(0.5) + math.log(0.8) + math.log(0.25))
        assert (mu.seed, mu.draw_index) == (4, 1)
        with pytest.raises(ValidationError):
            transform_jacobi_to_ho([[1.5]])

    @pytest.mark.parametrize("beta,A", [(2, 4), (1, 5)])
    def test_pushforward_offset_is_constant(self, beta, A):
        p = JacobiParams(beta, A, 2, 2)
        levels = [np.array([[0.5], [0.3], [0.7]]), np.array([[0.8, 0.25], [0.6, 0.1], [0.9, 0.55]])]
        mu, log_jac = transform_jacobi_to_ho(levels)
        residual = (logdens_jacobi(levels, p) + log_jac
                    - logdens_ho_joint(mu, p.principal_pi, p.principal_pi_hat(2), p.theta))
        assert np.var(residual) < 1e-8


def test_normalization_cache():
    cache = NormalizationCache()
    calls = []

    def compute():
        calls.append(1)
        return (1.5, 1e-9)

    assert cache.get_or_compute(("mvb", 2), compute) == (1.5, 1e-9)
    assert cache.get_or_compute(("mvb", 2), compute) == (1.5, 1e-9)
    assert len(calls) == 1
    assert ("mvb", 2) in cache
    assert len(cache) == 1
