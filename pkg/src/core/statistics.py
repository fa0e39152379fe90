"""
Goodness-of-Fit Statistics

Kolmogorov-Smirnov, binned chi-square and Monte Carlo moment comparisons, each
returning a TestReport whose verdict follows from the statistic and the declared
threshold.
"""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, stats

from models.report import TestReport, VerdictKind

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100
MIN_EXPECTED = 5.0


def _check_samples(report: TestReport, samples: np.ndarray) -> bool:
    if samples.size < MIN_SAMPLES:
        report.add_error(f"Need at least {MIN_SAMPLES} samples, got {samples.size}")
        return False
    if np.ptp(samples) == 0:
        report.add_error("Degenerate samples: all values are equal")
        return False
    return True


def ks_test(samples: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray],
            test_id: str = "ks", significance: float = 0.01, seed: Optional[int] = None) -> TestReport:
    """
    One-sample Kolmogorov-Smirnov test against a continuous CDF.

    Args:
        samples: Draws
        cdf: Vectorized reference CDF
        test_id: Report id
        significance: p-value threshold
        seed: Seed recorded in the report

    Returns:
        Statistical TestReport (statistic = KS distance)
    """
    x = np.asarray(samples, dtype=float).ravel()
    report = TestReport(test_id, VerdictKind.STATISTICAL, threshold=significance,
                        sample_size=int(x.size), seed=seed)
    if _check_samples(report, x):
        result = stats.kstest(x, cdf)
        report.statistic = float(result.statistic)
        report.p_value = float(result.pvalue)
    return report.decide()


def merge_bins(observed: np.ndarray, expected: np.ndarray,
               min_expected: float = MIN_EXPECTED) -> Tuple[np.ndarray, np.ndarray]:
    """Merge adjacent bins left to right until every expected count is at least ``min_expected``."""
    obs_out, exp_out = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_out.append(acc_o)
            exp_out.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if exp_out:
            obs_out[-1] += acc_o
            exp_out[-1] += acc_e
        else:
            obs_out.append(acc_o)
            exp_out.append(acc_e)
    if len(exp_out) < len(expected):
        logger.debug(f"Merged {len(expected)} bins into {len(exp_out)}")
    return np.asarray(obs_out), np.asarray(exp_out)


def chi2_counts(observed: Sequence[float], expected: Sequence[float], test_id: str = "chi2",
                significance: float = 0.01, seed: Optional[int] = None, ddof: int = 0) -> TestReport:
    """Pearson chi-square on counts; expected counts are rescaled to the observed total."""
    obs = np.asarray(observed, dtype=float).ravel()
    exp = np.asarray(expected, dtype=float).ravel()
    total = float(obs.sum())
    report = TestReport(test_id, VerdictKind.STATISTICAL, threshold=significance,
                        sample_size=int(total), seed=seed)
    if total < MIN_SAMPLES:
        report.add_error(f"Need at least {MIN_SAMPLES} samples, got {int(total)}")
        return report.decide()
    if not np.all(np.isfinite(exp)) or np.any(exp < 0) or exp.sum() <= 0:
        report.add_error("Expected counts must be finite and nonnegative")
        return report.decide()
    exp = exp * (total / exp.sum())
    obs_m, exp_m = merge_bins(obs, exp)
    if obs_m.size < 2 + ddof:
        report.add_error(f"Only {obs_m.size} bins left after merging")
        return report.decide()
    result = stats.chisquare(obs_m, exp_m, ddof=ddof)
    report.statistic = float(result.statistic)
    report.p_value = float(result.pvalue)
    report.details.update({'bins': int(obs_m.size), 'bins_before_merge': int(obs.size)})
    return report.decide()


def chi2_binned(samples: Sequence[float], density: Callable[[float], float], edges: Sequence[float],
                test_id: str = "chi2", significance: float = 0.01, seed: Optional[int] = None) -> TestReport:
    """
    Chi-square test of samples against an unnormalized density.

    Bin probabilities are the density integrals over [edges[i], edges[i+1]] divided by
    their total; samples outside the edges are counted in the outer bins.
    """
    x = np.asarray(samples, dtype=float).ravel()
    edges = np.asarray(edges, dtype=float)
    masses = np.array([integrate.quad(density, lo, hi, limit=200)[0] for lo, hi in zip(edges, edges[1:])])
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, masses.size - 1)
    observed = np.bincount(idx, minlength=masses.size)
    report = chi2_counts(observed, masses, test_id, significance, seed)
    if x.size and np.ptp(x) == 0:
        report.add_error("Degenerate samples: all values are equal")
    return report


def moment_compare(samples: Sequence[float], g: Optional[Callable[[np.ndarray], np.ndarray]],
                   reference: float, sigmas: float = 4.0, test_id: str = "moment",
                   seed: Optional[int] = None) -> TestReport:
    """
    Compare the Monte Carlo mean of g(samples) with a reference value.

    The statistic is |mean - reference| / (sd / sqrt(N)); it passes at ``sigmas``.
    """
    x = np.asarray(samples, dtype=float)
    values = np.asarray(g(x) if g is not None else x, dtype=float).ravel()
    report = TestReport(test_id, VerdictKind.TOLERANCE, threshold=sigmas,
                        sample_size=int(values.size), seed=seed)
    if not _check_samples(report, values):
        return report.decide()
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(values.size))
    report.statistic = abs(mean - reference) / se
    report.details.update({'mean': mean, 'reference': float(reference), 'standard_error': se})
    return report.decide()


def two_sample_z(a: np.ndarray, b: np.ndarray) -> float:
    """z-score of the difference of two sample means."""
    se = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
    return float((a.mean() - b.mean()) / se) if se > 0 else 0.0
