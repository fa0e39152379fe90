"""Tests for Bessel and Heckman-Opdam functions and the HCIZ integral."""

import math

import numpy as np
import pytest
from scipy.special import gammaln, hyp1f1

from core.hyperfun import (bessel_B, bessel_B_tilde, cross_vandermonde, hciz, hciz_determinant_constant,
                           ho_F, ho_F_tilde, log_bessel_batch, vandermonde, vandermonde_trig)
from models.params import HyperParams, QuadSpec
from utils.errors import DegenerateInputError, ParameterError


class TestVandermonde:

    def test_products(self):
        assert vandermonde((0.5, 3.0, 1.0)).log_magnitude == pytest.approx(math.log(2.0 * 2.5 * 0.5))
        assert cross_vandermonde((2.0,), (3.0, 0.5)).log_magnitude == pytest.approx(math.log(1.5))
        assert vandermonde_trig((2.0, 1.0)).log_magnitude == pytest.approx(math.log(2 * math.sinh(0.5)))

    def test_ties_vanish(self):
        assert vandermonde((1.0, 1.0)).is_zero
        assert cross_vandermonde((1.0,), (1.0,)).is_zero


class TestBessel:

    def test_single_entry_is_exponential(self):
        assert bessel_B(HyperParams(1, 1, 0.5, (2.0,), (0.3,))).log_value == pytest.approx(0.6)

    def test_one_by_two_closed_form(self):
        lam, s1, s2 = 1.5, 0.4, -0.8
        expected = (math.exp(s1 * lam) - math.exp(s2 * lam)) / ((s1 - s2) * lam)
        value = bessel_B(HyperParams(1, 2, 1.0, (lam,), (s1, s2)), fast=False)
        assert value.value == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("theta", [0.5, 1.5])
    def test_one_by_two_confluent(self, theta):
        lam, s1, s2 = 2.0, 0.3, -1.1
        expected = math.exp(s2 * lam) * hyp1f1(theta, 2 * theta, (s1 - s2) * lam)
        value = bessel_B(HyperParams(1, 2, theta, (lam,), (s1, s2)), fast=False)
        assert value.value == pytest.approx(expected, rel=1e-7)

    @pytest.mark.parametrize("theta", [0.5, 1.0])
    def test_constant_s_matches_quadrature(self, theta):
        params = HyperParams(2, 3, theta, (2.0, 1.0), (-0.4, -0.4, -0.4))
        fast = bessel_B(params)
        slow = bessel_B(params, fast=False)
        assert fast.log_value == pytest.approx(-0.4 * 3.0)
        assert slow.log_value == pytest.approx(fast.log_value, abs=1e-6)

    @pytest.mark.parametrize("theta,tol", [(1.0, 1e-8), (0.5, 1e-6)])
    def test_symmetry(self, theta, tol):
        lam, s = (2.0, 0.5), (1.5, 0.3)
        lhs = bessel_B(HyperParams(2, 2, theta, lam, s), fast=False)
        rhs = bessel_B(HyperParams(2, 2, theta, s, lam), fast=False)
        assert abs(math.expm1(lhs.log_value - rhs.log_value)) < tol

    def test_scaling(self):
        c, lam, s = 1.7, (2.0, 1.0), (-0.5, -1.0, -1.5)
        lhs = bessel_B(HyperParams(2, 3, 1.0, tuple(c * v for v in lam), s), fast=False)
        rhs = bessel_B(HyperParams(2, 3, 1.0, lam, tuple(c * v for v in s)), fast=False)
        assert lhs.log_value == pytest.approx(rhs.log_value, abs=1e-8)

    def test_conjugate(self):
        theta, lam, s = 0.5, (2.0, 1.0), (-0.5, -1.0, -1.5)
        plain = bessel_B(HyperParams(2, 3, theta, lam, s), fast=False)
        tilde = bessel_B_tilde(HyperParams(2, 3, theta, lam, s))
        shift = -2 * gammaln(theta) + (theta - 1.0) * math.log(2.0 * 1.0)
        assert tilde.log_value == pytest.approx(plain.log_value + shift, abs=1e-10)

    def test_batch_matches_single(self):
        tops = np.array([[2.0, 1.0], [3.0, 0.5]])
        s = (0.2, -0.3, -0.6)
        batch = log_bessel_batch(tops, s, 1.0, QuadSpec())
        for row, top in enumerate(tops):
            single = bessel_B(HyperParams(2, 3, 1.0, tuple(top), s), fast=False)
            assert batch.log_value[row] == pytest.approx(single.log_value, abs=1e-12)

    def test_exact_cases(self):
        assert bessel_B(HyperParams(2, 3, 0.5, (0.0, 0.0), (1.0, 2.0, 3.0))).log_value == 0.0
        assert bessel_B(HyperParams(0, 2, 0.5, (), (1.0, 2.0))).log_value == 0.0

    def test_invalid_arguments(self):
        with pytest.raises(ParameterError):
            HyperParams(3, 2, 1.0, (3.0, 2.0, 1.0), (0.0, 1.0))
        with pytest.raises(ParameterError):
            bessel_B(HyperParams(2, 2, 1.0, (2.0, -1.0), (0.0, 1.0)), fast=False)
        with pytest.raises(DegenerateInputError):
            bessel_B(HyperParams(2, 2, 1.0, (1.0, 1.0), (0.0, 1.0)), fast=False)


class TestHeckmanOpdam:

    @pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
    def test_normalization(self, theta):
        value = ho_F(HyperParams(1, 2, theta, (1.3,), (0.0, -theta)))
        assert value.log_value == pytest.approx(0.0, abs=1e-7)

    def test_one_by_two_closed_form(self):
        lam, s1, s2 = 1.2, 0.5, -0.7
        expected = (math.exp(s1 * lam) - math.exp(s2 * lam)) / ((s1 - s2) * -math.expm1(-lam))
        assert ho_F(HyperParams(1, 2, 1.0, (lam,), (s1, s2))).value == pytest.approx(expected, rel=1e-10)

    def test_single_entry_and_conjugate(self):
        params = HyperParams(1, 1, 0.5, (2.0,), (-0.3,))
        assert ho_F(params).log_value == pytest.approx(-0.6)
        shift = -gammaln(0.5) - 0.5 * math.log(-math.expm1(-2.0))
        assert ho_F_tilde(params).log_value == pytest.approx(-0.6 + shift)


class TestHCIZ:

    def test_scalar_case(self):
        assert hciz((2.0,), (1.5,), 2).log_value == pytest.approx(-3.0)
        assert hciz((2.0,), (1.5,), 1).log_value == pytest.approx(-1.5)

    def test_zero_argument(self):
        assert hciz((0.0, 0.0), (2.0, 1.0), 2).log_value == 0.0
        assert hciz((), (), 1).log_value == 0.0

    def test_determinant_constant(self):
        assert hciz_determinant_constant(2) == -1.0
        assert hciz_determinant_constant(3) == -2.0
        assert hciz_determinant_constant(4) == 12.0

    def test_determinant_two_by_two(self):
        (a1, a2), (b1, b2) = (2.0, 1.0), (1.0, 0.5)
        expected = ((math.exp(-a1 * b2 - a2 * b1) - math.exp(-a1 * b1 - a2 * b2))
                    / ((a1 - a2) * (b1 - b2)))
        assert hciz((a1, a2), (b1, b2), 2, route="determinant").value == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("a,b", [((2.0, 1.0), (1.0, 0.5)), ((2.5, 1.5, 0.5), (1.0, 0.75, 0.5))])
    def test_bessel_matches_determinant(self, a, b):
        det = hciz(a, b, 2, route="determinant")
        bes = hciz(a, b, 2, route="bessel")
        assert abs(math.expm1(bes.log_value - det.log_value)) < 1e-6

    def test_bessel_handles_zero_padding(self):
        det = hciz((2.0, 1.0, 0.5), (1.0, 0.5), 2, route="determinant")
        bes = hciz((2.0, 1.0, 0.5), (1.0, 0.5), 2, route="bessel")
        assert abs(math.expm1(bes.log_value - det.log_value)) < 1e-6

    def test_haar_mc_unitary(self):
        a, b = (2.0, 1.0), (1.0, 0.5)
        det = hciz(a, b, 2, route="determinant")
        mc = hciz(a, b, 2, route="haar-mc", samples=50_000, rng=np.random.default_rng(11))
        assert abs(math.expm1(mc.log_value - det.log_value)) < 5 * mc.rel_error

    def test_haar_mc_orthogonal(self):
        a, b = (2.0, 1.0), (1.0, 0.5)
        bes = hciz(a, b, 1, route="bessel")
        mc = hciz(a, b, 1, route="haar-mc", samples=50_000, rng=np.random.default_rng(12))
        assert abs(math.expm1(mc.log_value - bes.log_value)) < 5 * math.hypot(mc.rel_error, bes.rel_error)

    def test_errors(self):
        with pytest.raises(ParameterError):
            hciz((1.0, -1.0), (1.0, 0.5), 2)
        with pytest.raises(ParameterError):
            hciz((2.0, 1.0), (1.0, 0.5), 1, route="determinant")
        with pytest.raises(ParameterError):
            hciz((2.0, 1.0), (1.0, 0.5), 2, route="series")
        with pytest.raises(ParameterError):
            hciz((2.0,), (1.0,), 3)
        with pytest.raises(DegenerateInputError):
            hciz((1.0, 1.0), (1.0, 0.5), 2, route="determinant")
