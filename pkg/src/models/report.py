"""
Verification Report Models

TestReport records the outcome of one statistical or numerical check; SuiteReport
collects reports of a suite run and applies the Bonferroni verdict.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional


class VerdictKind(Enum):
    """How a report's verdict is derived."""
    STATISTICAL = "statistical"   # p-value against a significance level
    TOLERANCE = "tolerance"       # statistic against a maximum deviation
    TRAJECTORY = "trajectory"     # monotone error decrease plus final tolerance


def _clean(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item"):
        return _clean(value.item())
    return value


@dataclass
class TestReport:
    """Outcome of one check."""

    __test__ = False  # not a pytest class

    test_id: str
    kind: VerdictKind
    statistic: float = math.nan
    p_value: Optional[float] = None
    threshold: float = 0.0
    passed: bool = False
    sample_size: int = 0
    seed: Optional[int] = None
    runtime: float = 0.0
    errors: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    def add_error(self, message: str) -> None:
        """Record a problem; any error fails the report."""
        self.errors.append(message)
        self.passed = False

    def decide(self) -> "TestReport":
        """Derive ``passed`` from statistic, p-value and threshold."""
        if self.errors:
            self.passed = False
        elif self.kind is VerdictKind.STATISTICAL:
            self.passed = self.p_value is not None and self.p_value > self.threshold
        elif self.kind is VerdictKind.TOLERANCE:
            self.passed = math.isfinite(self.statistic) and self.statistic <= self.threshold
        else:
            self.passed = (math.isfinite(self.statistic) and self.statistic <= self.threshold
                           and bool(self.details.get("monotone", False)))
        return self

    def passes_at(self, significance: float) -> bool:
        """Verdict with a corrected significance level for statistical reports."""
        if self.kind is not VerdictKind.STATISTICAL:
            return self.passed
        return not self.errors and self.p_value is not None and self.p_value > significance

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> Dict[str, Any]:
        return _clean({
            'test_id': self.test_id,
            'kind': self.kind.value,
            'statistic': self.statistic,
            'p_value': self.p_value,
            'threshold': self.threshold,
            'verdict': self.verdict,
            'sample_size': self.sample_size,
            'seed': self.seed,
            'runtime': round(self.runtime, 6),
            'errors': list(self.errors),
            'details': self.details,
        })


@dataclass
class SuiteReport:
    """Reports of one suite run, ordered by test id."""

    suite: str
    seed: int
    significance: float
    reports: List[TestReport] = field(default_factory=list)

    @property
    def statistical_count(self) -> int:
        return sum(1 for r in self.reports if r.kind is VerdictKind.STATISTICAL)

    @property
    def corrected_significance(self) -> float:
        return self.significance / max(1, self.statistical_count)

    def passed_ids(self) -> List[str]:
        alpha = self.corrected_significance
        return [r.test_id for r in self.reports if r.passes_at(alpha)]

    def failures(self) -> List[TestReport]:
        alpha = self.corrected_significance
        return [r for r in self.reports if not r.passes_at(alpha)]

    @property
    def passed(self) -> bool:
        return not self.failures()

    def summary(self) -> Dict[str, Any]:
        return {
            'suite': self.suite,
            'seed': self.seed,
            'tests': len(self.reports),
            'failed': len(self.failures()),
            'significance': self.significance,
            'corrected_significance': self.corrected_significance,
            'verdict': "pass" if self.passed else "fail",
        }
