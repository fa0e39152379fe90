"""
Verification Suites

Registry of named tests, the threshold manifest that must declare every one of them
before a run, and the runner that executes a suite in parallel with one random
substream per test id.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

from core.limits import LIMIT_CHECKS
from core.verify import Verifier, check_determinism, check_interlacing
from models.params import JacobiParams, WishartParams
from models.report import SuiteReport, TestReport, VerdictKind
from utils.errors import ConfigError, CornersLabError
from utils.logger import LoggerMixin, log_exception, log_function_call
from utils.seeding import substream

logger = logging.getLogger(__name__)

SUITES = ('acceptance', 'quick', 'limits')

# (verifier, rng, threshold, seed, count, options) -> TestReport
Runner = Callable[[Verifier, Any, float, int, int, Dict[str, Any]], TestReport]


@dataclass(frozen=True)
class TestSpec:
    """A registered test: how to run it and which suites include it."""

    __test__ = False

    test_id: str
    run: Runner
    suites: Tuple[str, ...]
    count: int = 0
    quick_count: int = 0


def _kernel(p: WishartParams, m: int) -> Runner:
    return lambda v, rng, thr, seed, count, opts: v.kernel(p, m, count, rng, thr, opts['test_id'], seed)


def _jacobi(p: JacobiParams) -> Runner:
    return lambda v, rng, thr, seed, count, opts: v.jacobi(p, count, rng, thr, opts['test_id'], seed)


def _identity(identity_id: str, **extra) -> Runner:
    def run(v, rng, thr, seed, count, opts):
        options = {k: val for k, val in opts.items() if k != 'test_id'}
        return v.identity(identity_id, rng, thr, opts['test_id'], seed, count=count, **extra, **options)
    return run


def _limit(check_id: str) -> Runner:
    return lambda v, rng, thr, seed, count, opts: v.limit(check_id, thr, opts['test_id'], opts.get('eps'))


def _registry() -> Dict[str, TestSpec]:
    both = ('acceptance', 'quick')
    acc = ('acceptance',)
    specs = [
        TestSpec("hciz-consistency", _identity("hciz-consistency"), acc),
        TestSpec("hciz-real", _identity("hciz-real"), acc),
        TestSpec("cauchy-mvb-n1", _identity("cauchy-mvb", n=1), both),
        TestSpec("cauchy-ho-n1", _identity("cauchy-ho", n=1), both),
        TestSpec("cauchy-mvb-n2", _identity("cauchy-mvb", n=2), acc),
        TestSpec("cauchy-ho-n2", _identity("cauchy-ho", n=2), acc),
        TestSpec("kernel-beta1-n2", _kernel(WishartParams(1, (1.0, 2.0), (0.5, 0.25)), 2), acc, 100_000),
        TestSpec("kernel-beta2-n2", _kernel(WishartParams(2, (1.0, 2.0), (0.5, 0.25)), 2), acc, 100_000),
        TestSpec("kernel-beta2-n1", _kernel(WishartParams(2, (1.0,), (0.0, 0.0, 0.5)), 3), both, 100_000, 20_000),
        TestSpec("ordinary-kernel", _identity("ordinary-kernel"), both, 2000, 500),
        TestSpec("jacobi-beta2-m1", _jacobi(JacobiParams(2, 4, 3, 1)), both, 100_000, 10_000),
        TestSpec("jacobi-beta2-m2", _jacobi(JacobiParams(2, 4, 2, 2)), acc, 100_000),
        TestSpec("jacobi-beta1-m1", _jacobi(JacobiParams(1, 5, 3, 1)), both, 100_000, 10_000),
        TestSpec("jacobi-beta1-m2", _jacobi(JacobiParams(1, 5, 2, 2)), acc, 100_000),
        TestSpec("jacobi-ho-pushforward", _identity("jacobi-ho-pushforward"), both, 1000, 200),
        TestSpec("chain", _identity("chain"), both, 500, 100),
        TestSpec("mac-cauchy", _identity("mac-cauchy"), both),
        TestSpec("bessel-scaling", _identity("bessel-scaling"), both),
        TestSpec("bessel-symmetry", _identity("bessel-symmetry"), both),
        TestSpec("bessel-normalization", _identity("bessel-normalization"), both),
        TestSpec("interlacing", lambda v, rng, thr, seed, count, opts: check_interlacing(count, rng, opts['test_id'], seed),
                 both, 10_000, 1000),
        TestSpec("determinism", lambda v, rng, thr, seed, count, opts: check_determinism(count, seed, opts['test_id']),
                 both, 200, 50),
        TestSpec("expected-trace",
                 lambda v, rng, thr, seed, count, opts: v.expected_trace(
                     WishartParams(2, (1.0, 2.0, 0.5), (0.5, 0.25, 1.0)), 3, count, rng, thr, opts['test_id'], seed),
                 both, 100_000, 10_000),
    ]
    specs += [TestSpec(f"limit-{cid}", _limit(cid), ('acceptance', 'limits')) for cid in LIMIT_CHECKS]
    return {s.test_id: s for s in specs}


TESTS: Dict[str, TestSpec] = _registry()


def suite_tests(suite: str) -> List[TestSpec]:
    if suite not in SUITES:
        raise ConfigError(f"Unknown suite: {suite} (expected one of {', '.join(SUITES)})")
    return sorted((s for s in TESTS.values() if suite in s.suites), key=lambda s: s.test_id)


def load_thresholds(path) -> Dict[str, Dict[str, Any]]:
    """
    Load the threshold manifest.

    The manifest is a JSON object with a ``tests`` map from test id to an entry holding
    a numeric ``threshold`` and optional extra options.

    Raises:
        ConfigError: Missing file, invalid JSON or malformed entry
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Threshold manifest not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid threshold manifest {path}: {e}") from e

    tests = data.get('tests') if isinstance(data, dict) else None
    if not isinstance(tests, dict):
        raise ConfigError(f"Threshold manifest {path} has no 'tests' map")
    errors = []
    for test_id, entry in tests.items():
        if not isinstance(entry, dict) or not isinstance(entry.get('threshold'), (int, float)):
            errors.append(f"{test_id}: entry needs a numeric 'threshold'")
    if errors:
        raise ConfigError("Threshold manifest validation failed:\n" + "\n".join(f"- {e}" for e in errors))
    return tests


@dataclass
class SuitePlan:
    """Tests of a suite resolved against the manifest before any of them runs."""

    suite: str
    entries: List[Tuple[TestSpec, Dict[str, Any]]] = field(default_factory=list)

    @property
    def test_ids(self) -> List[str]:
        return [spec.test_id for spec, _ in self.entries]


class SuiteRunner(LoggerMixin):
    """Runs a verification suite; reports come back ordered by test id."""

    def __init__(self, config, thresholds: Optional[Dict[str, Dict[str, Any]]] = None):
        self.config = config
        self.thresholds = thresholds if thresholds is not None else load_thresholds(config.THRESHOLDS)
        self.verifier = Verifier(config)

    def plan(self, suite: str, only: Optional[List[str]] = None) -> SuitePlan:
        """Resolve every selected test against the manifest; unknown or undeclared ids fail."""
        specs = suite_tests(suite)
        if only:
            unknown = sorted(set(only) - {s.test_id for s in specs})
            if unknown:
                raise ConfigError(f"Tests not in suite '{suite}': {', '.join(unknown)}")
            specs = [s for s in specs if s.test_id in only]
        missing = [s.test_id for s in specs if s.test_id not in self.thresholds]
        if missing:
            raise ConfigError(f"Threshold manifest has no entry for: {', '.join(missing)}")
        return SuitePlan(suite, [(s, self.thresholds[s.test_id]) for s in specs])

    def _run_one(self, spec: TestSpec, entry: Dict[str, Any], suite: str, seed: int) -> TestReport:
        rng = substream(seed, spec.test_id)
        count = spec.quick_count if suite == 'quick' and spec.quick_count else spec.count
        options = {k: v for k, v in entry.items() if k not in ('threshold', 'description')}
        options['test_id'] = spec.test_id
        try:
            report = self.verifier.timed(spec.run, self.verifier, rng, float(entry['threshold']),
                                         seed, count, options)
        except CornersLabError as e:
            log_exception(self.logger, e, f"test {spec.test_id}")
            report = TestReport(spec.test_id, VerdictKind.TOLERANCE, threshold=float(entry['threshold']), seed=seed)
            report.add_error(f"{type(e).__name__}: {e}")
        report.seed = seed
        self.logger.info(f"{spec.test_id}: {report.verdict} (statistic={report.statistic:.4g}, "
                         f"runtime={report.runtime:.1f}s)")
        return report

    @log_function_call
    def run(self, suite: str, seed: Optional[int] = None, only: Optional[List[str]] = None) -> SuiteReport:
        """
        Run a suite.

        Args:
            suite: acceptance, quick or limits
            seed: Global seed (defaults to the configured seed)
            only: Optional subset of test ids

        Returns:
            SuiteReport with reports sorted by test id
        """
        seed = seed if seed is not None else self.config.SEED
        plan = self.plan(suite, only)
        self.logger.info(f"Running suite '{suite}' with {len(plan.entries)} tests (seed={seed}, "
                         f"workers={self.config.WORKERS})")
        with ThreadPoolExecutor(max_workers=self.config.WORKERS) as executor:
            futures = [executor.submit(self._run_one, spec, entry, suite, seed) for spec, entry in plan.entries]
            reports = [f.result() for f in futures]
        result = SuiteReport(suite, seed, self.config.SIGNIFICANCE, sorted(reports, key=lambda r: r.test_id))
        summary = result.summary()
        self.logger.info(f"Suite '{suite}': {summary['tests'] - summary['failed']}/{summary['tests']} passed")
        return result
