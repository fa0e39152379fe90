"""Tests for identity checks, Cauchy identities and suite orchestration."""

import json

import numpy as np
import pytest

from conftest import TEST_SEED, THRESHOLDS_PATH, write_text
from core.cauchy import cauchy_ho, cauchy_mvb, ho_rhs, mvb_rhs
from core.suite import TESTS, SuiteRunner, load_thresholds, suite_tests
from core.verify import (IDENTITY_IDS, Verifier, check_determinism, check_identity, check_interlacing,
                         check_limit)
from integrations.exporter import Exporter
from models.params import JacobiParams, WishartParams
from models.report import VerdictKind
from utils.errors import ConfigError, ParameterError


class TestCauchy:

    @pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
    def test_scalar_bessel_identity(self, theta):
        result = cauchy_mvb(1, 1, theta, (1.0,), (0.5,))
        assert result.route == "scalar"
        assert result.rel_error < 1e-10

    @pytest.mark.parametrize("theta", [0.5, 1.0])
    def test_scalar_ho_identity(self, theta):
        result = cauchy_ho(1, 1, theta, (-1.0,), (-0.5,))
        assert result.rel_error < 1e-10

    def test_bessel_identity_with_inner_integral(self):
        result = cauchy_mvb(1, 2, 1.0, (1.0, 1.5), (0.5,))
        assert result.route == "outer-tanh-sinh"
        assert result.nodes > 0
        assert result.rel_error < 1e-3

    def test_product_sides(self):
        # n = m = 1, θ = 1: Γ(1)Γ(1)/Γ(1)^2 (s + r)^{-1}
        assert mvb_rhs(1, 1, 1.0, (1.0,), (0.5,)) == pytest.approx(-np.log(1.5))
        # Γ(x)/Γ(1 + x) = 1/x with x = 1.5
        assert ho_rhs(1, 1, 1.0, (-1.0,), (-0.5,)) == pytest.approx(-np.log(1.5))

    def test_to_dict(self):
        data = cauchy_mvb(1, 1, 1.0, (1.0,), (0.5,)).to_dict()
        assert data['identity'] == "cauchy-mvb"
        assert data['rhs'] == pytest.approx(1 / 1.5)

    def test_domain_errors(self):
        with pytest.raises(ParameterError):
            cauchy_mvb(1, 1, 1.0, (0.5,), (-0.5,))
        with pytest.raises(ParameterError):
            cauchy_ho(1, 1, 1.0, (0.5,), (-0.2,))
        with pytest.raises(ParameterError):
            cauchy_mvb(2, 1, 1.0, (1.0,), (0.5, 0.5))
        with pytest.raises(ParameterError):
            cauchy_mvb(1, 2, 1.0, (1.0,), (0.5,))
        with pytest.raises(ParameterError):
            cauchy_mvb(3, 3, 1.0, (1.0,) * 3, (0.5,) * 3)


class TestIdentities:

    @pytest.mark.parametrize("identity_id,threshold", [
        ("mac-cauchy", 1e-6),
        ("bessel-normalization", 1e-8),
        ("bessel-scaling", 1e-8),
        ("cauchy-mvb", 1e-10),
        ("cauchy-ho", 1e-10),
    ])
    def test_deterministic_identities(self, identity_id, threshold):
        report = check_identity(identity_id, threshold)
        assert report.kind is VerdictKind.TOLERANCE
        assert report.passed, report.details

    def test_sampled_identities(self, rng):
        assert check_identity("ordinary-kernel", 1e-8, rng, count=200).passed
        chain = check_identity("chain", 1e-5, rng, count=100)
        assert chain.passed
        assert chain.sample_size == 400

    def test_pushforward(self, rng):
        report = check_identity("jacobi-ho-pushforward", 1e-8, rng, count=100)
        assert report.passed
        assert set(report.details['residual_variance']) == {"beta=1", "beta=2"}

    def test_report_metadata(self):
        report = check_identity("mac-cauchy", 1e-6, test_id="mac", seed=9, max_degree=10)
        assert report.test_id == "mac"
        assert report.seed == 9
        assert report.details['max_degree'] == 10

    def test_unknown_identity(self):
        assert "mac-cauchy" in IDENTITY_IDS
        with pytest.raises(ParameterError):
            check_identity("pieri", 1e-6)


class TestStructuralChecks:

    def test_interlacing(self, rng):
        report = check_interlacing(200, rng, seed=TEST_SEED)
        assert report.passed
        assert report.statistic == 0.0
        assert report.sample_size == 800

    def test_determinism(self):
        report = check_determinism(20, seed=5)
        assert report.passed
        assert report.statistic == 0.0
        assert report.details["identical_bytes"]
        assert report.details["bytes"] > 0

    def test_determinism_compares_exported_bytes(self, monkeypatch):
        calls = []
        export = Exporter.export_samples

        def drifting(self, samples, path, seed, params):
            calls.append(path)
            return export(self, samples, path, seed, {**params, "run": len(calls)})

        monkeypatch.setattr(Exporter, "export_samples", drifting)
        report = check_determinism(5, seed=5)
        assert len(calls) == 2
        assert report.details["draw_mismatches"] == 0
        assert not report.details["identical_bytes"]
        assert not report.passed


class TestLimitReports:

    def test_trajectory_report(self):
        report = check_limit("gamma-rat")
        assert report.kind is VerdictKind.TRAJECTORY
        assert report.passed
        assert report.details['monotone']
        assert len(report.details['trajectory']) == report.sample_size

    def test_threshold_override(self):
        report = check_limit("qgamma", threshold=1e-12)
        assert not report.passed

    def test_verifier_uses_config(self, config):
        verifier = Verifier(config)
        assert verifier.quad.order == config.QUAD_ORDER
        report = verifier.timed(verifier.limit, "ratio-qpoch", 1e-4, "limit-ratio-qpoch")
        assert report.passed
        assert report.runtime >= 0.0


class TestSuites:

    def test_registry(self):
        quick = {spec.test_id for spec in suite_tests("quick")}
        acceptance = {spec.test_id for spec in suite_tests("acceptance")}
        assert quick <= acceptance
        assert {spec.test_id for spec in suite_tests("limits")} == {t for t in TESTS if t.startswith("limit-")}
        with pytest.raises(ConfigError):
            suite_tests("nightly")

    def test_manifest_covers_registry(self):
        assert set(TESTS) <= set(load_thresholds(THRESHOLDS_PATH))

    def test_manifest_errors(self, tmp_output):
        with pytest.raises(ConfigError):
            load_thresholds(tmp_output / "missing.json")
        with pytest.raises(ConfigError):
            load_thresholds(write_text(tmp_output / "bad.json", "{not json"))
        with pytest.raises(ConfigError):
            load_thresholds(write_text(tmp_output / "flat.json", json.dumps({"chain": 1e-6})))
        with pytest.raises(ConfigError):
            load_thresholds(write_text(tmp_output / "text.json",
                                       json.dumps({"tests": {"chain": {"threshold": "small"}}})))

    def test_plan_rejects_unknown_and_undeclared(self, config):
        runner = SuiteRunner(config)
        assert runner.plan("quick", ["chain", "mac-cauchy"]).test_ids == ["chain", "mac-cauchy"]
        with pytest.raises(ConfigError):
            runner.plan("quick", ["kernel-beta1-n2"])
        partial = SuiteRunner(config, {"chain": {"threshold": 1e-6}})
        with pytest.raises(ConfigError):
            partial.plan("quick")

    def test_run_subset(self, config):
        result = SuiteRunner(config).run("quick", seed=3, only=["mac-cauchy", "bessel-normalization"])
        assert [r.test_id for r in result.reports] == ["bessel-normalization", "mac-cauchy"]
        assert all(r.seed == 3 for r in result.reports)
        assert result.passed

    def test_limits_suite_subset(self, config):
        result = SuiteRunner(config).run("limits", only=["limit-qgamma", "limit-gamma-rat"])
        assert result.seed == config.SEED
        assert result.passed
        assert result.statistical_count == 0

    def test_failing_check_becomes_report(self, config):
        thresholds = load_thresholds(THRESHOLDS_PATH)
        thresholds["limit-qgamma"] = {"threshold": 1e-3, "eps": [0.1, 0.2, 0.3]}
        result = SuiteRunner(config, thresholds).run("limits", seed=1, only=["limit-qgamma"])
        report = result.reports[0]
        assert not report.passed
        assert "ParameterError" in report.errors[0]

    @pytest.mark.slow
    def test_quick_suite_passes(self, config):
        result = SuiteRunner(config).run("quick", seed=TEST_SEED)
        assert result.passed, [r.test_id for r in result.failures()]

    @pytest.mark.slow
    def test_statistical_kernel_check(self, config, rng):
        verifier = Verifier(config)
        report = verifier.kernel(WishartParams(2, (1.0,), (0.0, 0.0, 0.5)), 3, 20_000, rng, 0.001,
                                 "kernel-beta2-n1", TEST_SEED)
        assert report.kind is VerdictKind.STATISTICAL
        assert report.p_value is not None

    @pytest.mark.slow
    def test_statistical_jacobi_check(self, config, rng):
        report = Verifier(config).jacobi(JacobiParams(2, 4, 3, 1), 10_000, rng, 0.001, "jacobi-beta2-m1", TEST_SEED)
        assert report.passed
