"""
Verification Checks

Executable checks tying the samplers to the densities and the special functions to
their identities. Every check returns a TestReport; thresholds come from the caller
(normally the threshold manifest) and are never adjusted after the fact.
"""

import logging
import math
import tempfile
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from core.cauchy import cauchy_ho, cauchy_mvb
from core.densities import (chain_log_constant, log_kernel_wishart, log_kernel_wishart_ordinary,
                            logdens_ho_joint, logdens_jacobi, logdens_mvb_joint, transform_jacobi_to_ho)
from core.ensembles import SampleBatch, expected_trace, sample_jacobi_batch, sample_wishart_batch
from core.hyperfun import bessel_B, hciz
from core.limits import get_check, run_limit
from core.qseries import cauchy_partial_sum, cauchy_product
from core.quadrature import map_rule, ordered_nodes, tanh_sinh_rule
from core.statistics import MIN_SAMPLES, chi2_counts, ks_test, moment_compare, two_sample_z
from integrations.exporter import Exporter
from models.params import HyperParams, JacobiParams, QParams, QuadSpec, WishartParams
from models.report import TestReport, VerdictKind
from utils.errors import ParameterError
from utils.logger import LoggerMixin, log_function_call

logger = logging.getLogger(__name__)

PILOT_FRACTION = 0.1
KERNEL_GAP_BINS = 6
KERNEL_RATIO_BINS = 4
KERNEL_GRID = 96
KERNEL_CELL_ORDER = 32
MIN_KERNEL_SAMPLES = 2000
MARKOV_Z = 3.0
MOMENT_SIGMAS = 4.0
INTERLACE_RTOL = 1e-9

IDENTITY_IDS = ('cauchy-mvb', 'cauchy-ho', 'mac-cauchy', 'hciz-consistency', 'hciz-real',
                'jacobi-ho-pushforward', 'bessel-scaling', 'bessel-symmetry', 'bessel-normalization',
                'chain', 'ordinary-kernel')


def _tolerance_report(test_id: str, threshold: float, seed: Optional[int] = None,
                      sample_size: int = 0) -> TestReport:
    return TestReport(test_id, VerdictKind.TOLERANCE, threshold=threshold, seed=seed, sample_size=sample_size)


def _rel(log_a: float, log_b: float) -> float:
    return abs(math.expm1(log_a - log_b))


# ---------------------------------------------------------------------------
# Wishart transition kernels
# ---------------------------------------------------------------------------

def _kernel_cells(a: float, p: WishartParams, m: int, gap_edges: np.ndarray,
                  ratio_edges: Optional[np.ndarray], quad: QuadSpec) -> Tuple[np.ndarray, float]:
    """
    Log kernel mass of each cell given μ^{m-1} = (a), and the conditional mean of μ^m_1 - a.

    Cells are gap bins of u = μ^m_1 - a, crossed with ratio bins of v = μ^m_2 / a when
    μ^m has two entries. The Jacobian of the v-substitution is constant in the cell
    index and cancels after normalization.
    """
    rule = tanh_sinh_rule(KERNEL_CELL_ORDER, quad.t_max)
    U, lwU = map_rule(rule, gap_edges[:-1], gap_edges[1:])
    K1, R = U.shape
    if ratio_edges is None:
        nxt = (a + U).reshape(-1, 1)
        lw = lwU
    else:
        V, lwV = map_rule(rule, ratio_edges[:-1], ratio_edges[1:])
        K2 = V.shape[0]
        b1 = np.broadcast_to((a + U)[:, None, :, None], (K1, K2, R, R))
        b2 = np.broadcast_to((a * V)[None, :, None, :], (K1, K2, R, R))
        nxt = np.stack([b1.reshape(-1), b2.reshape(-1)], axis=1)
        lw = (lwU[:, None, :, None] + lwV[None, :, None, :]).reshape(K1 * K2, R * R)
        U = np.broadcast_to(U[:, None, :, None], (K1, K2, R, R)).reshape(K1 * K2, R * R)
    prev = np.full((nxt.shape[0], 1), a)
    log_q = np.asarray(log_kernel_wishart(prev, nxt, m, p, quad)).reshape(lw.shape)
    terms = lw + log_q
    cell_log = logsumexp(terms, axis=1)
    total = logsumexp(cell_log)
    with np.errstate(divide="ignore"):
        mean_gap = math.exp(logsumexp(terms + np.log(U)) - total)
    return cell_log - total, mean_gap


@log_function_call
def check_theorem_kernel(p: WishartParams, m: int, sample_count: int, rng: np.random.Generator,
                         quad: Optional[QuadSpec] = None, significance: float = 0.01,
                         test_id: str = "kernel", seed: Optional[int] = None) -> TestReport:
    """
    Chi-square test of the conditional law of μ^m given μ^{m-1} against the kernel Q_{m-1,m}.

    The conditioning level must have a single entry (n = 1, or m = 2). The first tenth
    of the draws is a pilot fixing the bins; the kernel is integrated over every cell on
    a quantile grid of the conditioning value and interpolated per draw. For n = 1 and
    m ≥ 3 the Markov property is spot-checked: residuals μ^m - E[μ^m | μ^{m-1}] must not
    depend on μ^{m-2} beyond a z-score of 3.
    """
    quad = quad or QuadSpec()
    n = p.n
    if m < 2 or min(m - 1, n) != 1:
        raise ParameterError(f"Kernel checks need a one-entry conditioning level, got n={n}, m={m}")
    if n > 3 or m > 3:
        raise ParameterError(f"Kernel checks support n <= 3 and m <= 3, got n={n}, m={m}")

    report = TestReport(test_id, VerdictKind.STATISTICAL, threshold=significance, seed=seed)
    levels = sample_wishart_batch(p, m, sample_count, rng)
    pilot = int(sample_count * PILOT_FRACTION)
    a = levels[m - 2][:, 0]
    nxt = levels[m - 1]
    gap = nxt[:, 0] - a
    two_d = nxt.shape[1] == 2

    a_test, gap_test = a[pilot:], gap[pilot:]
    report.sample_size = int(a_test.size)
    if a_test.size < MIN_KERNEL_SAMPLES:
        report.add_error(f"Need at least {MIN_KERNEL_SAMPLES} test draws, got {a_test.size}")
        return report.decide()

    gap_pilot = gap[:pilot]
    cap = 2.0 * float(gap_pilot.max()) + 1.0
    inner = np.quantile(gap_pilot, np.linspace(0.0, 1.0, KERNEL_GAP_BINS + 1)[1:-1])
    gap_edges = np.concatenate([[0.0], np.unique(inner), [cap]])
    ratio_edges = np.linspace(0.0, 1.0, KERNEL_RATIO_BINS + 1) if two_d else None
    K1 = gap_edges.size - 1
    K2 = KERNEL_RATIO_BINS if two_d else 1

    grid = np.unique(np.quantile(a_test, np.linspace(0.0, 1.0, KERNEL_GRID)))
    probs = np.empty((grid.size, K1 * K2))
    mean_gap = np.empty(grid.size)
    for g, value in enumerate(grid):
        cell_log, mean_gap[g] = _kernel_cells(float(value), p, m, gap_edges, ratio_edges, quad)
        probs[g] = np.exp(cell_log)

    i = np.clip(np.searchsorted(gap_edges, gap_test, side="right") - 1, 0, K1 - 1)
    if two_d:
        ratio = nxt[pilot:, 1] / a_test
        j = np.clip(np.floor(ratio * K2).astype(int), 0, K2 - 1)
        cells = i * K2 + j
    else:
        cells = i
    observed = np.bincount(cells, minlength=K1 * K2)
    expected = np.array([np.interp(a_test, grid, probs[:, c]).sum() for c in range(K1 * K2)])

    result = chi2_counts(observed, expected, test_id, significance, seed)
    report.statistic, report.p_value = result.statistic, result.p_value
    report.errors.extend(result.errors)
    report.details.update(result.details)
    report.details.update({'n': n, 'm': m, 'beta': p.beta, 'pilot': pilot, 'grid': int(grid.size)})

    if n == 1 and m >= 3:
        resid = gap_test - np.interp(a_test, grid, mean_gap)
        older = levels[m - 3][pilot:, 0]
        split = older <= np.median(older)
        z = two_sample_z(resid[split], resid[~split])
        report.details['markov_z'] = z
        if abs(z) > MARKOV_Z:
            report.add_error(f"Markov spot check: residual shift z={z:.2f} given μ^{m - 2}")
    logger.debug(f"{test_id}: chi2={report.statistic:.3f} p={report.p_value}")
    return report.decide()


# ---------------------------------------------------------------------------
# Jacobi corners
# ---------------------------------------------------------------------------

def _jacobi_beta_law(p: JacobiParams):
    a = p.A - p.n + 1
    if p.beta == 2:
        return stats.beta(a, p.n)
    return stats.beta(a / 2.0, p.n / 2.0)


def _jacobi_moments(p: JacobiParams, order: int, t_max: float) -> Tuple[float, float]:
    """E[λ²_1 + λ²_2] and E[λ¹_1] under the m=2 joint density, by quadrature."""
    top, lw_top = ordered_nodes(2, 0.0, 1.0, order, t_max)
    rule = tanh_sinh_rule(order, t_max)
    inner, lw_inner = map_rule(rule, top[:, 1], top[:, 0])
    R = rule.size
    level2 = np.repeat(top, R, axis=0)
    level1 = inner.reshape(-1, 1)
    logw = (lw_top[:, None] + lw_inner).reshape(-1)
    log_d = np.asarray(logdens_jacobi([level1, level2], p))
    terms = logw + log_d
    z = logsumexp(terms)
    w = np.exp(terms - z)
    return float((w * level2.sum(axis=1)).sum()), float((w * level1[:, 0]).sum())


@log_function_call
def check_theorem_jacobi(p: JacobiParams, sample_count: int, rng: np.random.Generator,
                         quad: Optional[QuadSpec] = None, significance: float = 0.01,
                         sigmas: float = MOMENT_SIGMAS, test_id: str = "jacobi",
                         seed: Optional[int] = None) -> TestReport:
    """
    Jacobi corners against the joint density.

    m = 1: KS test of the single eigenvalue against its Beta law, plus a grid check
    that the density differs from the Beta log-pdf by a constant. m = 2: the moments
    E[λ²_1 + λ²_2] and E[λ¹_1] against quadrature of the density, within ``sigmas``.
    """
    quad = quad or QuadSpec()
    if p.m_max > 2:
        raise ParameterError(f"Jacobi checks support m <= 2, got m={p.m_max}")
    levels = sample_jacobi_batch(p, sample_count, rng)

    if p.m_max == 1:
        law = _jacobi_beta_law(p)
        report = ks_test(levels[0][:, 0], law.cdf, test_id, significance, seed)
        grid = np.linspace(0.05, 0.95, 19)
        gap = np.asarray(logdens_jacobi([grid.reshape(-1, 1)], p)) - law.logpdf(grid)
        spread = float(np.ptp(gap))
        report.details.update({'law': f"beta{law.args}", 'density_offset_spread': spread})
        if spread > 1e-10:
            report.add_error(f"Jacobi density is not proportional to its Beta law (spread {spread:.2e})")
        return report.decide()

    ref_top, ref_inner = _jacobi_moments(p, quad.order, quad.t_max)
    top_report = moment_compare(levels[1].sum(axis=1), None, ref_top, sigmas, f"{test_id}:top", seed)
    inner_report = moment_compare(levels[0][:, 0], None, ref_inner, sigmas, f"{test_id}:inner", seed)
    report = TestReport(test_id, VerdictKind.TOLERANCE, threshold=sigmas, seed=seed,
                        sample_size=int(sample_count))
    report.statistic = max(top_report.statistic, inner_report.statistic)
    report.errors.extend(top_report.errors + inner_report.errors)
    report.details.update({'top_sum': top_report.details, 'inner': inner_report.details})
    return report.decide()


# ---------------------------------------------------------------------------
# Moments and invariants
# ---------------------------------------------------------------------------

def check_expected_trace(p: WishartParams, m: int, sample_count: int, rng: np.random.Generator,
                         sigmas: float = MOMENT_SIGMAS, test_id: str = "expected-trace",
                         seed: Optional[int] = None) -> TestReport:
    """Monte Carlo mean of tr M_m against Σ_{i≤m} Σ_j 1/(π_j + π̂_i)."""
    levels = sample_wishart_batch(p, m, sample_count, rng)
    return moment_compare(levels[m - 1].sum(axis=1), None, expected_trace(p, m), sigmas, test_id, seed)


def _interlacing_violations(levels: List[np.ndarray]) -> int:
    scale = max(float(np.abs(lvl).max()) for lvl in levels if lvl.size)
    tol = INTERLACE_RTOL * max(1.0, scale)
    bad = np.zeros(levels[0].shape[0], dtype=bool)
    for lo, up in zip(levels, levels[1:]):
        for i in range(lo.shape[1]):
            bad |= lo[:, i] > up[:, i] + tol
            if i + 1 < up.shape[1]:
                bad |= lo[:, i] < up[:, i + 1] - tol
    return int(bad.sum())


def check_interlacing(sample_count: int, rng: np.random.Generator, test_id: str = "interlacing",
                      seed: Optional[int] = None) -> TestReport:
    """Count interlacing violations across Wishart and Jacobi draws of both β."""
    report = _tolerance_report(test_id, 0.0, seed)
    violations, draws = 0, 0
    for beta in (1, 2):
        w = sample_wishart_batch(WishartParams(beta, (1.0, 2.0, 0.5), (0.5, 0.25, 0.0, 1.0)), 4, sample_count, rng)
        j = sample_jacobi_batch(JacobiParams(beta, 5, 4, 4), sample_count, rng)
        for levels in (w, j):
            violations += _interlacing_violations(levels)
            draws += sample_count
    report.statistic = float(violations)
    report.sample_size = draws
    return report.decide()


def check_determinism(sample_count: int, seed: int, test_id: str = "determinism") -> TestReport:
    """
    The same seed gives byte-identical exported samples for one and two workers.

    The statistic counts mismatching draws, plus one when the exported CSV files differ.
    """
    report = _tolerance_report(test_id, 0.0, seed, sample_count)
    runner = SampleBatch()
    params = WishartParams(1, (1.0, 2.0), (0.5,))
    header = {'model': 'wishart', 'beta': 1, 'pi': list(params.pi), 'pi_hat': list(params.pi_hat), 'levels': 3}
    runs = [runner.run(params, sample_count, seed=seed, workers=workers, m_max=3) for workers in (1, 2)]
    mismatches = sum(1 for x, y in zip(*runs)
                     if any(a.values != b.values for a, b in zip(x.levels, y.levels)))
    mismatches += abs(len(runs[0]) - len(runs[1]))

    exporter = Exporter(fmt='csv')
    with tempfile.TemporaryDirectory(prefix="corners-lab-") as tmp:
        files = [exporter.export_samples(run, Path(tmp) / f"workers-{i}.csv", seed, header).read_bytes()
                 for i, run in enumerate(runs, start=1)]
    identical = files[0] == files[1]
    report.statistic = float(mismatches + (0 if identical else 1))
    report.details.update({'draw_mismatches': mismatches, 'identical_bytes': identical,
                           'bytes': len(files[0])})
    return report.decide()


# ---------------------------------------------------------------------------
# Identities
# ---------------------------------------------------------------------------

def _identity_cauchy(kind: str, n: int, quad: QuadSpec, report: TestReport) -> None:
    fn = cauchy_mvb if kind == "cauchy-mvb" else cauchy_ho
    sign = 1.0 if kind == "cauchy-mvb" else -1.0
    s, r = ((1.0,), (0.5,)) if n == 1 else ((1.0, 1.5), (0.5, 2.0))
    errors = {}
    for theta in (0.5, 1.0):
        res = fn(n, n, theta, tuple(sign * v for v in s), tuple(sign * v for v in r), quad)
        errors[f"theta={theta}"] = res.rel_error
    report.statistic = max(errors.values())
    report.details.update({'n': n, 'rel_errors': errors})


def _identity_mac_cauchy(report: TestReport, max_degree: int = 12) -> None:
    x, y = (0.3, 0.2), (0.25, 0.1)
    errors = {}
    for q in (0.3, 0.7):
        for t in (0.3, 0.7):
            qt = QParams(q, t)
            partial = cauchy_partial_sum(x, y, qt, max_degree)
            product = cauchy_product(x, y, qt)
            errors[f"q={q},t={t}"] = abs(partial - product) / product
    report.statistic = max(errors.values())
    report.details.update({'max_degree': max_degree, 'rel_errors': errors})


def _identity_hciz_consistency(quad: QuadSpec, rng: np.random.Generator, samples: int,
                               report: TestReport, mc_tolerance: float) -> None:
    cases = {2: ((2.0, 1.0), (1.0, 0.5)), 3: ((2.5, 1.5, 0.5), (1.0, 0.75, 0.5))}
    det_bessel, mc_det = {}, {}
    for m, (a, b) in cases.items():
        det = hciz(a, b, 2, "determinant", quad)
        bes = hciz(a, b, 2, "bessel", quad)
        mc = hciz(a, b, 2, "haar-mc", quad, samples=samples, rng=rng)
        det_bessel[m] = _rel(bes.log_value, det.log_value)
        mc_det[m] = _rel(mc.log_value, det.log_value)
    report.statistic = max(det_bessel.values())
    report.details.update({'determinant_vs_bessel': det_bessel, 'mc_vs_determinant': mc_det,
                           'mc_tolerance': mc_tolerance})
    worst = max(mc_det.values())
    if worst > mc_tolerance:
        report.add_error(f"haar-mc deviates from the determinant route by {worst:.2e}")


def _identity_hciz_real(quad: QuadSpec, rng: np.random.Generator, samples: int, report: TestReport) -> None:
    a, b = (2.0, 1.0), (1.0, 0.5)
    mc = hciz(a, b, 1, "haar-mc", quad, samples=samples, rng=rng)
    bes = hciz(a, b, 1, "bessel", quad)
    combined = math.hypot(mc.rel_error, bes.rel_error)
    gap = _rel(mc.log_value, bes.log_value)
    report.statistic = gap / combined if combined > 0 else (0.0 if gap == 0 else math.inf)
    report.details.update({'haar_mc': mc.value, 'bessel': bes.value, 'combined_error': combined})


def _identity_pushforward(quad: QuadSpec, rng: np.random.Generator, count: int, report: TestReport) -> None:
    variances = {}
    for p in (JacobiParams(2, 4, 2, 2), JacobiParams(1, 5, 2, 2)):
        levels = sample_jacobi_batch(p, count, rng)
        mu, log_jac = transform_jacobi_to_ho(levels)
        residual = (np.asarray(logdens_jacobi(levels, p)) + log_jac
                    - np.asarray(logdens_ho_joint(mu, p.principal_pi, p.principal_pi_hat(p.m_max),
                                                  p.theta, quad)))
        finite = np.isfinite(residual)
        if not finite.all():
            report.add_error(f"{int((~finite).sum())} non-finite residuals at beta={p.beta}")
        variances[f"beta={p.beta}"] = float(np.var(residual[finite])) if finite.any() else math.inf
    report.statistic = max(variances.values())
    report.sample_size = 2 * count
    report.details['residual_variance'] = variances


def _identity_bessel(kind: str, quad: QuadSpec, report: TestReport) -> None:
    errors = {}
    for theta in (0.5, 1.0):
        if kind == "bessel-scaling":
            c = 1.7
            lam, s = (2.0, 1.0), (-0.5, -1.0, -1.5)
            lhs = bessel_B(HyperParams(2, 3, theta, tuple(c * v for v in lam), s), quad, fast=False)
            rhs = bessel_B(HyperParams(2, 3, theta, lam, tuple(c * v for v in s)), quad, fast=False)
            errors[f"theta={theta}"] = _rel(lhs.log_value, rhs.log_value)
        elif kind == "bessel-symmetry":
            lam, s = (2.0, 0.5), (1.5, 0.3)
            lhs = bessel_B(HyperParams(2, 2, theta, lam, s), quad, fast=False)
            rhs = bessel_B(HyperParams(2, 2, theta, s, lam), quad, fast=False)
            errors[f"theta={theta}"] = _rel(lhs.log_value, rhs.log_value)
        else:
            value = bessel_B(HyperParams(2, 3, theta, (2.0, 1.0), (0.0, 0.0, 0.0)), quad, fast=False)
            errors[f"theta={theta}"] = abs(math.expm1(value.log_value))
    report.statistic = max(errors.values())
    report.details['rel_errors'] = errors


def _identity_chain(quad: QuadSpec, rng: np.random.Generator, count: int, report: TestReport) -> None:
    errors = {}
    for beta in (1, 2):
        for pi in ((1.0,), (1.0, 2.0)):
            p = WishartParams(beta, pi, (0.5, 0.25))
            m = 2
            levels = sample_wishart_batch(p, m, count, rng)
            chain = np.zeros(count)
            prev = np.zeros((count, 0))
            for j, nxt in enumerate(levels, start=1):
                chain = chain + np.asarray(log_kernel_wishart(prev, nxt, j, p, quad))
                prev = nxt
            joint = np.asarray(logdens_mvb_joint(levels, p, quad))
            gap = chain - joint - chain_log_constant(p, m)
            errors[f"beta={beta},n={p.n}"] = float(np.max(np.abs(np.expm1(gap))))
    report.statistic = max(errors.values())
    report.sample_size = 4 * count
    report.details['max_pointwise_error'] = errors


def _identity_ordinary_kernel(quad: QuadSpec, rng: np.random.Generator, count: int, report: TestReport) -> None:
    p = WishartParams(1, (1.0, 1.0))
    levels = sample_wishart_batch(p, 3, count, rng)
    worst = 0.0
    prev = np.zeros((count, 0))
    for m, nxt in enumerate(levels, start=1):
        general = np.asarray(log_kernel_wishart(prev, nxt, m, p, quad))
        ordinary = np.asarray(log_kernel_wishart_ordinary(prev, nxt, m, p.n))
        worst = max(worst, float(np.max(np.abs(general - ordinary))))
        prev = nxt
    report.statistic = worst
    report.sample_size = count


@log_function_call
def check_identity(identity_id: str, threshold: float, rng: Optional[np.random.Generator] = None,
                   quad: Optional[QuadSpec] = None, test_id: Optional[str] = None,
                   seed: Optional[int] = None, samples: int = 100_000, count: int = 1000,
                   **options: Any) -> TestReport:
    """
    Evaluate one identity and compare its largest deviation with ``threshold``.

    Args:
        identity_id: One of IDENTITY_IDS
        threshold: Maximum accepted deviation (for hciz-real, in combined error units)
        rng: Generator for identities that sample
        quad: Quadrature settings
        test_id: Report id (defaults to the identity id)
        seed: Seed recorded in the report
        samples: Haar sample count for the HCIZ Monte Carlo route
        count: Draw count for sampled configurations
        **options: ``n`` for the Cauchy identities, ``mc_tolerance`` for hciz-consistency

    Returns:
        Tolerance TestReport
    """
    if identity_id not in IDENTITY_IDS:
        raise ParameterError(f"Unknown identity: {identity_id}")
    quad = quad or QuadSpec()
    rng = rng if rng is not None else np.random.default_rng(seed or 0)
    report = _tolerance_report(test_id or identity_id, threshold, seed)

    if identity_id in ("cauchy-mvb", "cauchy-ho"):
        _identity_cauchy(identity_id, int(options.get("n", 1)), quad, report)
    elif identity_id == "mac-cauchy":
        _identity_mac_cauchy(report, int(options.get("max_degree", 12)))
    elif identity_id == "hciz-consistency":
        _identity_hciz_consistency(quad, rng, samples, report, float(options.get("mc_tolerance", 2e-2)))
    elif identity_id == "hciz-real":
        _identity_hciz_real(quad, rng, samples, report)
    elif identity_id == "jacobi-ho-pushforward":
        _identity_pushforward(quad, rng, count, report)
    elif identity_id.startswith("bessel-"):
        _identity_bessel(identity_id, quad, report)
    elif identity_id == "chain":
        _identity_chain(quad, rng, count, report)
    else:
        _identity_ordinary_kernel(quad, rng, count, report)
    return report.decide()


# ---------------------------------------------------------------------------
# Limits
# ---------------------------------------------------------------------------

def check_limit(check_id: str, eps: Optional[Sequence[float]] = None, threshold: Optional[float] = None,
                quad: Optional[QuadSpec] = None, test_id: Optional[str] = None) -> TestReport:
    """Convergence trajectory of a limit check: monotone decrease and final error within tolerance."""
    check = get_check(check_id)
    traj = run_limit(check_id, eps, quad=quad)
    report = TestReport(test_id or check_id, VerdictKind.TRAJECTORY,
                        statistic=traj.final_error,
                        threshold=threshold if threshold is not None else check.tolerance,
                        sample_size=len(traj.eps))
    report.details.update({'monotone': traj.monotone, 'limit': traj.limit, 'trajectory': traj.to_rows()})
    if not traj.monotone:
        report.add_error("Relative error does not decrease monotonically")
    return report.decide()


class Verifier(LoggerMixin):
    """Runs checks with the quadrature and sampling settings of one configuration."""

    def __init__(self, config):
        self.config = config
        self.quad = QuadSpec.from_config(config)

    def kernel(self, p: WishartParams, m: int, count: int, rng, threshold: float,
               test_id: str, seed: int) -> TestReport:
        return check_theorem_kernel(p, m, count, rng, self.quad, threshold, test_id, seed)

    def jacobi(self, p: JacobiParams, count: int, rng, threshold: float, test_id: str, seed: int) -> TestReport:
        if p.m_max == 1:
            return check_theorem_jacobi(p, count, rng, self.quad, significance=threshold, test_id=test_id, seed=seed)
        return check_theorem_jacobi(p, count, rng, self.quad, sigmas=threshold, test_id=test_id, seed=seed)

    def identity(self, identity_id: str, rng, threshold: float, test_id: str, seed: int,
                 count: int = 1000, **options) -> TestReport:
        return check_identity(identity_id, threshold, rng, self.quad, test_id, seed,
                              samples=self.config.MC_SAMPLES, count=count, **options)

    def limit(self, check_id: str, threshold: float, test_id: str,
              eps: Optional[Sequence[float]] = None) -> TestReport:
        return check_limit(check_id, eps, threshold, self.quad, test_id)

    def expected_trace(self, p: WishartParams, m: int, count: int, rng, threshold: float,
                       test_id: str, seed: int) -> TestReport:
        return check_expected_trace(p, m, count, rng, threshold, test_id, seed)

    def timed(self, fn, *args, **kwargs) -> TestReport:
        """Run a check and record its wall-clock runtime."""
        start = time.perf_counter()
        report = fn(*args, **kwargs)
        report.runtime = time.perf_counter() - start
        return report
