"""
Gelfand-Tsetlin Polytope Quadrature

Integrates log-domain weights over the interlacing polytope below a fixed top row.
Levels are nested top-down: the box of entry i on level l is [μ^{l+1}_{i+1}, μ^{l+1}_i]
(0 past the end), so every level is a tensor product of one-dimensional rules
whose endpoints depend on the level above.

Rules:
    double-exponential  tanh-sinh, robust to the endpoint singularities of θ < 1
    tensor-gauss        Gauss-Legendre, for smooth integrands (θ = 1)
    monte-carlo         uniform sampling of the nested boxes, for dimensions up to 12
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp, roots_legendre

from models.params import QuadScheme, QuadSpec
from models.spectra import GTPattern
from utils.errors import DimensionError, QuadratureError

logger = logging.getLogger(__name__)

MAX_QUAD_DIMENSION = 6
MAX_MC_DIMENSION = 12
ENDPOINT_GUARD = 8.0 * np.finfo(float).eps
NODE_SLACK = 1e-12

LogIntegrand = Callable[[List[np.ndarray]], np.ndarray]


@dataclass(frozen=True)
class Rule:
    """One-dimensional rule on [-1, 1]; ``c`` is 1 - |x| computed without cancellation."""
    x: np.ndarray
    w: np.ndarray
    c: np.ndarray

    @property
    def size(self) -> int:
        return self.x.size


@lru_cache(maxsize=64)
def tanh_sinh_rule(order: int, t_max: float = 3.1) -> Rule:
    """
    Tanh-sinh rule with 2K + 1 nodes, K = order // 2, on t ∈ [-t_max, t_max].

    x = tanh(π/2 sinh t), w = h π/2 cosh t / cosh²(π/2 sinh t).
    """
    K = max(1, order // 2)
    h = t_max / K
    t = h * np.arange(-K, K + 1)
    u = 0.5 * np.pi * np.sinh(t)
    x = np.tanh(u)
    w = h * 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    c = 2.0 / (1.0 + np.exp(2.0 * np.abs(u)))
    return Rule(x, w, c)


@lru_cache(maxsize=64)
def gauss_legendre_rule(order: int) -> Rule:
    x, w = roots_legendre(order)
    return Rule(x, w, 1.0 - np.abs(x))


def rule_for(quad: QuadSpec, order: Optional[int] = None) -> Rule:
    order = order or quad.order
    if quad.scheme is QuadScheme.TENSOR_GAUSS:
        return gauss_legendre_rule(order)
    return tanh_sinh_rule(order, quad.t_max)


def map_rule(rule: Rule, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Map a rule onto per-row intervals.

    Args:
        rule: Rule on [-1, 1]
        lo: Lower endpoints, shape (B,)
        hi: Upper endpoints, shape (B,)

    Returns:
        (nodes, log weights), each (B, rule.size); nodes too close to an endpoint
        to be resolved in floating point get weight zero (log weight -inf)
    """
    lo = lo[:, None]
    hi = hi[:, None]
    half = 0.5 * (hi - lo)
    offset = half * rule.c[None, :]
    nodes = np.where(rule.x[None, :] >= 0, hi - offset, lo + offset)
    scale = np.maximum(np.abs(lo), np.abs(hi))
    usable = (offset > ENDPOINT_GUARD * scale) & (half > 0)
    with np.errstate(divide="ignore"):
        logw = np.where(usable, np.log(np.where(half > 0, half, 1.0)) + np.log(rule.w)[None, :], -np.inf)
    nodes = np.where(usable, nodes, lo + half)
    return nodes, logw


def gt_dimension(n: int, m: int) -> int:
    """Dimension of the polytope below a top row of length n at level m ≥ n."""
    return (m - n) * n + n * (n - 1) // 2


def level_sizes(n: int, m: int) -> List[int]:
    return [min(l, n) for l in range(1, m + 1)]


def _boxes(upper: np.ndarray, k: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    width = upper.shape[1]
    zeros = np.zeros(upper.shape[0])
    return [(upper[:, i + 1] if i + 1 < width else zeros, upper[:, i]) for i in range(k)]


def _expand(tops: np.ndarray, m: int, rule: Rule) -> Tuple[List[np.ndarray], np.ndarray]:
    """Tensor-product nodes of the whole polytope, grouped contiguously per top row."""
    n = tops.shape[1]
    sizes = level_sizes(n, m)
    levels: List[Optional[np.ndarray]] = [None] * m
    levels[m - 1] = tops
    logw = np.zeros(tops.shape[0])
    N = rule.size
    for l in range(m - 1, 0, -1):
        k = sizes[l - 1]
        mapped = [map_rule(rule, lo, hi) for lo, hi in _boxes(levels[l], k)]
        B = logw.size
        grid_nodes = np.empty((B,) + (N,) * k + (k,))
        grid_logw = np.broadcast_to(logw.reshape((B,) + (1,) * k), (B,) + (N,) * k).copy()
        for i, (nodes, lw) in enumerate(mapped):
            shape = (B,) + (1,) * i + (N,) + (1,) * (k - i - 1)
            grid_nodes[..., i] = np.broadcast_to(nodes.reshape(shape), (B,) + (N,) * k)
            grid_logw += lw.reshape(shape)
        reps = N ** k
        for j in range(l, m):
            levels[j] = np.repeat(levels[j], reps, axis=0)
        levels[l - 1] = grid_nodes.reshape(B * reps, k)
        logw = grid_logw.reshape(B * reps)
    return levels, logw


@dataclass
class GTResult:
    """Per-top log integrals with relative error estimates."""
    log_value: np.ndarray
    rel_error: np.ndarray
    nodes: int
    scheme: QuadScheme

    @property
    def converged(self) -> np.ndarray:
        return np.isfinite(self.rel_error)


def _pattern(levels: List[np.ndarray]) -> GTPattern:
    """Wrap quadrature nodes as a pattern; every node must lie in the polytope."""
    pattern = GTPattern(levels)
    tol = NODE_SLACK * max(1.0, float(np.max(np.abs(pattern.top))))
    if not pattern.is_valid(tol):
        bad = int(np.argmin(pattern.valid_mask(tol)))
        raise QuadratureError(f"Quadrature node outside the GT polytope: {pattern.row(bad)}")
    return pattern


def _reduce(log_terms: np.ndarray, groups: int) -> np.ndarray:
    if np.any(np.isnan(log_terms)):
        raise QuadratureError("Integrand returned NaN on the polytope")
    return logsumexp(log_terms.reshape(groups, -1), axis=1)


def _tensor_pass(log_integrand: LogIntegrand, tops: np.ndarray, m: int, rule: Rule,
                 chunk: int) -> np.ndarray:
    out = []
    for start in range(0, tops.shape[0], chunk):
        block = tops[start:start + chunk]
        levels, logw = _expand(block, m, rule)
        logf = np.asarray(log_integrand(_pattern(levels).levels), dtype=float)
        with np.errstate(invalid="ignore"):
            terms = np.where(np.isneginf(logw), -np.inf, logw + logf)
        out.append(_reduce(terms, block.shape[0]))
    return np.concatenate(out)


def _capped_order(quad: QuadSpec, dim: int) -> int:
    order = quad.order
    nodes = (2 * (order // 2) + 1) if quad.scheme is QuadScheme.DOUBLE_EXPONENTIAL else order
    if nodes ** dim <= quad.node_budget:
        return order
    per_axis = int(math.floor(quad.node_budget ** (1.0 / dim)))
    capped = max(2, per_axis - 1 if quad.scheme is QuadScheme.DOUBLE_EXPONENTIAL else per_axis)
    message = f"Node budget {quad.node_budget} caps order {order} -> {capped} in dimension {dim}"
    if quad.strict:
        raise QuadratureError(message)
    logger.warning(message)
    return capped


def _relative_gap(fine: np.ndarray, coarse: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", over="ignore"):
        gap = np.abs(np.expm1(coarse - fine))
    return np.where(np.isneginf(fine) & np.isneginf(coarse), 0.0, gap)


def _monte_carlo(log_integrand: LogIntegrand, tops: np.ndarray, m: int, samples: int,
                 rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    n = tops.shape[1]
    sizes = level_sizes(n, m)
    log_values, rel_errors = [], []
    for top in tops:
        levels: List[Optional[np.ndarray]] = [None] * m
        levels[m - 1] = np.broadcast_to(top, (samples, n)).copy()
        logw = np.zeros(samples)
        for l in range(m - 1, 0, -1):
            k = sizes[l - 1]
            entries = np.empty((samples, k))
            for i, (lo, hi) in enumerate(_boxes(levels[l], k)):
                width = hi - lo
                entries[:, i] = lo + width * rng.random(samples)
                with np.errstate(divide="ignore"):
                    logw += np.log(width)
            levels[l - 1] = entries
        terms = logw + np.asarray(log_integrand(_pattern(levels).levels), dtype=float)
        if np.any(np.isnan(terms)):
            raise QuadratureError("Integrand returned NaN on the polytope")
        peak = np.max(terms)
        if not np.isfinite(peak):
            log_values.append(-np.inf)
            rel_errors.append(0.0)
            continue
        scaled = np.exp(terms - peak)
        mean = scaled.mean()
        se = scaled.std(ddof=1) / math.sqrt(samples)
        log_values.append(peak + math.log(mean))
        rel_errors.append(se / mean)
    return np.asarray(log_values), np.asarray(rel_errors)


def gt_integrate(log_integrand: LogIntegrand, tops: Sequence[Sequence[float]], m: int,
                 quad: QuadSpec, rng: Optional[np.random.Generator] = None) -> GTResult:
    """
    Integrate exp(log_integrand) over the GT polytope below each top row.

    Args:
        log_integrand: Vectorized weight; receives levels[l-1] of shape (B, min(l, n))
            for l = 1..m and returns (B,) log values
        tops: Top rows, shape (P, n), each strictly decreasing and positive
        m: Depth of the pattern (top row is level m)
        quad: Quadrature settings
        rng: Generator for the Monte Carlo scheme

    Returns:
        GTResult with one log integral per top row
    """
    tops = np.atleast_2d(np.asarray(tops, dtype=float))
    P, n = tops.shape
    if n > m:
        raise DimensionError(f"Top row has {n} entries but the pattern has depth {m}")
    dim = gt_dimension(n, m)

    if dim == 0:
        levels = [tops[:, :min(l, n)] for l in range(1, m + 1)]
        logf = np.asarray(log_integrand(_pattern(levels).levels), dtype=float)
        return GTResult(logf, np.zeros(P), 1, quad.scheme)

    if quad.scheme is QuadScheme.MONTE_CARLO:
        if dim > MAX_MC_DIMENSION:
            raise DimensionError(f"Monte Carlo route supports dimension <= {MAX_MC_DIMENSION}, got {dim}")
        rng = rng if rng is not None else np.random.default_rng(quad.seed)
        values, errors = _monte_carlo(log_integrand, tops, m, quad.samples, rng)
        return GTResult(values, errors, quad.samples, quad.scheme)

    if dim > MAX_QUAD_DIMENSION:
        raise DimensionError(f"Tensor quadrature supports dimension <= {MAX_QUAD_DIMENSION}, got {dim}; "
                             f"use the monte-carlo scheme")

    order = _capped_order(quad, dim)
    fine_rule = rule_for(quad, order)
    coarse_rule = rule_for(quad, max(2, order // 2))
    per_top = fine_rule.size ** dim
    chunk = max(1, quad.node_budget // per_top)

    fine = _tensor_pass(log_integrand, tops, m, fine_rule, chunk)
    coarse = _tensor_pass(log_integrand, tops, m, coarse_rule, max(1, quad.node_budget // coarse_rule.size ** dim))
    rel_error = _relative_gap(fine, coarse)

    worst = float(np.max(rel_error)) if rel_error.size else 0.0
    if worst > quad.tolerance:
        message = f"GT quadrature estimate {worst:.2e} above tolerance {quad.tolerance:.1e} (dim {dim})"
        if quad.strict:
            raise QuadratureError(message)
        logger.debug(message)
    return GTResult(fine, rel_error, per_top * P, quad.scheme)


def ordered_nodes(n: int, lo: float, hi: float, order: int,
                  t_max: float = 3.1) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tanh-sinh nodes on the ordered region hi ≥ x_1 ≥ ... ≥ x_n ≥ lo.

    Returns:
        (points (P, n), log weights (P,))
    """
    rule = tanh_sinh_rule(order, t_max)
    points = np.empty((1, 0))
    logw = np.zeros(1)
    for _ in range(n):
        B = logw.size
        upper = points[:, -1] if points.shape[1] else np.full(B, hi)
        nodes, lw = map_rule(rule, np.full(B, lo), upper)
        points = np.concatenate([np.repeat(points, rule.size, axis=0), nodes.reshape(-1, 1)], axis=1)
        logw = (logw[:, None] + lw).reshape(-1)
    keep = np.isfinite(logw)
    return points[keep], logw[keep]
