"""Tests for q-Pochhammer symbols and Macdonald polynomials."""

import math

import numpy as np
import pytest

from conftest import schur_bialternant, truncated_qpoch
from core.qseries import (MacdonaldEvaluator, b_norm, b_norm_armleg, cauchy_partial_sum, cauchy_product,
                          enumerate_partitions, f_ratio, interlacing_partitions, log_f, log_qpoch_power,
                          macdonald_P, principal_eval, psi_branch, qpoch_fin, qpoch_inf)
from models.params import QParams
from models.spectra import Partition
from utils.errors import ParameterError


class TestPochhammer:

    @pytest.mark.parametrize("a,q", [(0.5, 0.3), (-0.7, 0.9), (1.2, 0.5), (0.999, 0.99)])
    def test_infinite_matches_product(self, a, q):
        assert qpoch_inf(a, q) == pytest.approx(truncated_qpoch(a, q), rel=1e-12)

    def test_vanishing_factor(self):
        assert qpoch_inf(1.0, 0.5) == 0.0
        assert qpoch_fin(4.0, 0.5, 3) == 0.0

    def test_finite(self):
        assert qpoch_fin(0.5, 0.5, 2) == pytest.approx(0.5 * 0.75)
        assert qpoch_fin(0.3, 0.4, 0) == 1.0
        with pytest.raises(ParameterError):
            qpoch_fin(0.3, 0.4, -1)

    def test_power_form(self):
        q = 0.8
        assert log_qpoch_power(2.5, math.log(q)) == pytest.approx(math.log(truncated_qpoch(q ** 2.5, q)),
                                                                  rel=1e-12)
        assert log_qpoch_power(0.0, math.log(q)) == -math.inf

    def test_rejects_bad_arguments(self):
        with pytest.raises(ParameterError):
            qpoch_inf(0.5, 1.0)
        with pytest.raises(ParameterError):
            qpoch_inf(3.0, 0.5)
        with pytest.raises(ParameterError):
            log_qpoch_power(-1.0, math.log(0.5))

    def test_f_forms_agree(self):
        qt = QParams(0.6, 0.3)
        u = qt.q ** 2 * qt.t
        assert math.exp(log_f(2, 1, qt)) == pytest.approx(f_ratio(u, qt), rel=1e-12)


class TestPartitions:

    def test_normalization_and_conjugate(self):
        lam = Partition((3, 1, 0, 0))
        assert lam.parts == (3, 1)
        assert lam.conjugate().parts == (2, 1, 1)
        assert lam.size == 4
        assert lam.padded(3) == (3, 1, 0)

    def test_rejects_increasing_parts(self):
        with pytest.raises(ParameterError):
            Partition((1, 2))

    def test_scaled(self):
        assert Partition.scaled((2.0, 0.35), 0.1).parts == (20, 3)

    def test_enumeration(self):
        parts = {p.parts for p in enumerate_partitions(4, 2)}
        assert parts == {(), (1,), (2,), (1, 1), (3,), (2, 1), (4,), (3, 1), (2, 2)}

    def test_interlacing_partitions(self):
        mus = {m.parts for m in interlacing_partitions(Partition((2, 1)), 3)}
        assert mus == {(1,), (1, 1), (2,), (2, 1)}


class TestMacdonald:

    X = (0.5, 0.3, 0.2)

    @pytest.mark.parametrize("parts", [(1,), (2,), (1, 1), (2, 1), (3, 1, 1), (2, 2)])
    def test_schur_at_q_equal_t(self, parts):
        qt = QParams(0.4, 0.4)
        assert macdonald_P(Partition(parts), self.X, qt) == pytest.approx(schur_bialternant(parts, self.X),
                                                                          rel=1e-10)

    def test_two_row_coefficient(self):
        qt = QParams(0.5, 0.3)
        x1, x2 = 0.7, 0.4
        c = (1 + qt.q) * (1 - qt.t) / (1 - qt.q * qt.t)
        expected = x1 ** 2 + x2 ** 2 + c * x1 * x2
        assert macdonald_P(Partition((2,)), (x1, x2), qt) == pytest.approx(expected, rel=1e-12)

    def test_too_many_parts_vanish(self):
        assert macdonald_P(Partition((1, 1, 1)), (0.3, 0.2), QParams(0.5, 0.3)) == 0.0

    @pytest.mark.parametrize("parts", [(1,), (3,), (2, 1), (3, 2, 1), (4, 4, 1)])
    def test_b_norm_forms_agree(self, parts):
        qt = QParams(0.7, 0.45)
        lam = Partition(parts)
        assert b_norm(lam, qt) == pytest.approx(b_norm_armleg(lam, qt), rel=1e-12)

    def test_b_norm_is_one_for_schur(self):
        assert b_norm(Partition((3, 2, 1)), QParams(0.5, 0.5)) == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("lam,mu", [((3, 1), (2,)), ((2, 2), (2, 1)), ((4, 2), (3, 1))])
    def test_branch_formulas_agree(self, lam, mu):
        qt = QParams(0.6, 0.35)
        full = psi_branch(Partition(lam), Partition(mu), 3, qt, formula="full")
        truncated = psi_branch(Partition(lam), Partition(mu), 3, qt, formula="truncated")
        assert full == pytest.approx(truncated, rel=1e-10)

    def test_branch_outside_interlacing(self):
        qt = QParams(0.6, 0.35)
        assert psi_branch(Partition((3, 1)), Partition((1, 1)), 2, qt) == 0.0
        with pytest.raises(ParameterError):
            psi_branch(Partition((2, 1)), Partition((1,)), 2, qt, formula="truncated")

    @pytest.mark.parametrize("parts,m", [((2,), 2), ((2, 1), 3), ((3, 1), 4)])
    def test_principal_evaluation(self, parts, m):
        qt = QParams(0.55, 0.4)
        x = [qt.t ** i for i in range(m)]
        assert principal_eval(Partition(parts), m, qt) == pytest.approx(
            MacdonaldEvaluator(qt).P(Partition(parts), x), rel=1e-9)

    def test_cauchy_sum_converges_to_product(self):
        qt = QParams(0.5, 0.3)
        x, y = (0.3, 0.2), (0.25, 0.15)
        partial = cauchy_partial_sum(x, y, qt, max_degree=14)
        assert partial == pytest.approx(cauchy_product(x, y, qt), rel=1e-7)

    def test_evaluator_cache(self):
        evaluator = MacdonaldEvaluator(QParams(0.5, 0.3))
        first = evaluator.P(Partition((2, 1)), self.X)
        evaluator.clear()
        assert evaluator.P(Partition((2, 1)), self.X) == first
        assert np.isfinite(evaluator.Q(Partition((2, 1)), self.X))
