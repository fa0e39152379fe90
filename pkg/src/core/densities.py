"""
Ensemble Densities

Unnormalized log densities of the multilevel Bessel (generalized Wishart),
Heckman-Opdam and Jacobi ensembles, the Wishart transition kernels, the λ → -log λ
change of variables and a cache for numerically estimated normalizations.

Every evaluator accepts either one configuration (a MultilevelSample or a list of
levels) or a batch given as a list of arrays levels[l-1] of shape (B, k_l).
Configurations outside the support (broken strict interlacing, nonpositive entries,
Jacobi entries outside (0, 1)) get log density -inf.
"""

import logging
import math
import threading
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from core.hyperfun import _log_cross_rows, _log_vdm_rows, log1mexp, log_bessel_batch, log_ho_batch
from models.params import JacobiParams, QuadSpec, WishartParams, check_beta
from models.spectra import LogValue, MultilevelSample, Spectrum
from utils.errors import ParameterError, ValidationError

logger = logging.getLogger(__name__)

LevelsLike = Union[MultilevelSample, Sequence[Sequence[float]], List[np.ndarray]]


def as_level_arrays(levels: LevelsLike) -> Tuple[List[np.ndarray], bool]:
    """
    Normalize input to a list of (B, k_l) arrays with decreasing rows.

    Returns:
        (arrays, batched) where ``batched`` tells whether the input was already a batch
    """
    if isinstance(levels, MultilevelSample):
        levels = [lvl.values for lvl in levels.levels]
    arrays = []
    batched = False
    for lvl in levels:
        if isinstance(lvl, Spectrum):
            lvl = lvl.values
        arr = np.asarray(lvl, dtype=float)
        if arr.ndim == 2:
            batched = True
        else:
            arr = arr.reshape(1, -1)
        arrays.append(-np.sort(-arr, axis=1))
    if not arrays:
        raise ValidationError("At least one level is required")
    rows = {a.shape[0] for a in arrays}
    if len(rows) != 1:
        raise ValidationError("All levels of a batch need the same number of rows")
    return arrays, batched


def _finish(values: np.ndarray, batched: bool):
    return values if batched else LogValue(float(values[0]))


def interlacing_mask(levels: List[np.ndarray], upper: Optional[float] = None) -> np.ndarray:
    """Rows with strictly interlacing levels and entries in (0, upper)."""
    B = levels[0].shape[0]
    ok = np.ones(B, dtype=bool)
    for lvl in levels:
        if lvl.shape[1]:
            ok &= lvl[:, -1] > 0
            if upper is not None:
                ok &= lvl[:, 0] < upper
            if lvl.shape[1] > 1:
                ok &= np.all(np.diff(lvl, axis=1) < 0, axis=1)
    for lo, up in zip(levels, levels[1:]):
        for i in range(lo.shape[1]):
            floor = up[:, i + 1] if i + 1 < up.shape[1] else 0.0
            ok &= (up[:, i] > lo[:, i]) & (lo[:, i] > floor)
    return ok


def _sum_log(a: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(a).sum(axis=1)


def _check_levels(levels: List[np.ndarray], n: int) -> None:
    for l, lvl in enumerate(levels, start=1):
        if lvl.shape[1] != min(l, n):
            raise ValidationError(f"Level {l} has {lvl.shape[1]} entries, expected {min(l, n)}")


def _masked(ok: np.ndarray, fill: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    out = np.full(ok.shape, -np.inf)
    if ok.any():
        out[ok] = fill(ok)
    return out


# ---------------------------------------------------------------------------
# Multivariate Bessel ensemble
# ---------------------------------------------------------------------------

def _pi_hat_vec(p: WishartParams, m: int) -> np.ndarray:
    return np.array([p.pi_hat_at(l) for l in range(1, m + 1)])


def _pi_hat_increments(levels: List[np.ndarray], pi_hat: np.ndarray) -> np.ndarray:
    total = np.zeros(levels[0].shape[0])
    previous = np.zeros_like(total)
    for l, lvl in enumerate(levels):
        current = lvl.sum(axis=1)
        total += pi_hat[l] * (current - previous)
        previous = current
    return total


def _interlace_terms(levels: List[np.ndarray], exponential: bool = False) -> np.ndarray:
    total = np.zeros(levels[0].shape[0])
    for lo, up in zip(levels, levels[1:]):
        total += (_log_cross_rows(lo, up, exponential)
                  - _log_vdm_rows(lo, exponential) - _log_vdm_rows(up, exponential))
        if exponential:
            total += lo.sum(axis=1)
    return total


def logdens_mvb_joint(levels: LevelsLike, p: WishartParams, quad: Optional[QuadSpec] = None):
    """
    Unnormalized joint log density of μ^1 ≺ ... ≺ μ^m in the Bessel ensemble.

    Args:
        levels: Levels μ^1..μ^m (level l has min(l, n) entries), single or batched
        p: Ensemble parameters; θ = β/2
        quad: Quadrature settings for B̃

    Returns:
        LogValue for a single configuration, (B,) array for a batch
    """
    arrays, batched = as_level_arrays(levels)
    n, theta = p.n, p.theta
    _check_levels(arrays, n)
    m = len(arrays)
    k = min(m, n)
    pi = np.asarray(p.pi)
    pi_hat = _pi_hat_vec(p, m)
    quad = quad or QuadSpec()
    const = theta * float(np.log(pi_hat[:, None] + pi[None, :]).sum())

    def fill(ok):
        lv = [a[ok] for a in arrays]
        top = lv[-1]
        out = (const + theta * _log_vdm_rows(top) - theta * _pi_hat_increments(lv, pi_hat)
               + theta * (n - k) * _sum_log(top)
               + (theta - 1.0) * (_sum_log(lv[k - 1]) - _sum_log(top))
               + (theta - 1.0) * _interlace_terms(lv))
        return out + log_bessel_batch(top, -theta * pi, theta, quad, conjugate=True).log_value

    return _finish(_masked(interlacing_mask(arrays), fill), batched)


def logdens_mvb_marginal(mu: Union[Sequence[float], np.ndarray], m: int, p: WishartParams,
                         quad: Optional[QuadSpec] = None):
    """Unnormalized log density of the level-m marginal μ^m of the Bessel ensemble."""
    arr = np.asarray(mu, dtype=float)
    batched = arr.ndim == 2
    top = -np.sort(-np.atleast_2d(arr), axis=1)
    n, theta = p.n, p.theta
    k = min(m, n)
    if top.shape[1] != k:
        raise ValidationError(f"Level {m} has {top.shape[1]} entries, expected {k}")
    pi = np.asarray(p.pi)
    pi_hat = _pi_hat_vec(p, m)
    quad = quad or QuadSpec()
    const = theta * float(np.log(pi_hat[:, None] + pi[None, :]).sum())

    def fill(ok):
        t = top[ok]
        out = const + 2 * theta * _log_vdm_rows(t) + theta * (max(n, m) - k) * _sum_log(t)
        out = out + log_bessel_batch(t, -theta * pi_hat, theta, quad).log_value
        return out + log_bessel_batch(t, -theta * pi, theta, quad, conjugate=True).log_value

    return _finish(_masked(interlacing_mask([top]), fill), batched)


# ---------------------------------------------------------------------------
# Wishart transition kernels
# ---------------------------------------------------------------------------

def beta1_kernel_constant(m: int, n: int) -> float:
    """log c_{m,n} of the β=1 kernel (the part not depending on π, π̂)."""
    if m <= n:
        return -0.5 * n * math.log(2.0) + (1 - m) * gammaln(0.5) - gammaln((n - m + 1) / 2.0)
    return -0.5 * n * math.log(2.0 * math.pi)


def _beta1_exponents(m: int, n: int) -> Tuple[float, float]:
    ind = 1 if m <= n else 0
    return (n - min(m, n) - ind) / 2.0, (n - min(m - 1, n) - ind) / 2.0


def chain_log_constant(p: WishartParams, m: int) -> float:
    """Σ_j log Q_j(μ^{j-1}, μ^j) minus logdens_mvb_joint; zero for β=2."""
    if p.beta == 2:
        return 0.0
    return float(sum(beta1_kernel_constant(j, p.n) for j in range(1, m + 1)) + min(m, p.n) * gammaln(0.5))


def _log_h(mu: np.ndarray, p: WishartParams, quad: QuadSpec) -> np.ndarray:
    """log h^β_π(μ) = log B_β^{k,n}(μ, -π) for β=2 and B_β^{k,n}(μ, -π/2) for β=1."""
    if mu.shape[1] == 0:
        return np.zeros(mu.shape[0])
    scale = 1.0 if p.beta == 2 else 0.5
    return log_bessel_batch(mu, -scale * np.asarray(p.pi), p.theta, quad).log_value


def _prev_level(mu_prev, rows: int) -> np.ndarray:
    arr = np.asarray(mu_prev, dtype=float)
    if arr.size == 0:
        return np.zeros((rows, 0))
    return -np.sort(-arr.reshape(rows, -1), axis=1)


def log_kernel_wishart(mu_prev, mu_next, m: int, p: WishartParams, quad: Optional[QuadSpec] = None):
    """
    Log transition density Q_{m-1,m}(μ^{m-1}, μ^m) of the generalized Wishart chain.

    Args:
        mu_prev: μ^{m-1} (empty for m = 1), single or (B, k) batch
        mu_next: μ^m
        m: Level of ``mu_next``
        p: Wishart parameters
        quad: Quadrature settings for the HCIZ factors

    Returns:
        LogValue or (B,) array; -inf off the strict interlacing support
    """
    if m < 1:
        raise ParameterError(f"Kernel level must be positive, got {m}")
    n = p.n
    nxt = np.asarray(mu_next, dtype=float)
    batched = nxt.ndim == 2
    nxt = -np.sort(-np.atleast_2d(nxt), axis=1)
    prev = _prev_level(mu_prev, nxt.shape[0])
    if nxt.shape[1] != min(m, n) or prev.shape[1] != min(m - 1, n):
        raise ValidationError(f"Kernel {m - 1}->{m} needs levels of length {min(m - 1, n)} and {min(m, n)}")
    quad = quad or QuadSpec()
    pi = np.asarray(p.pi)
    ph = p.pi_hat_at(m)
    mask = interlacing_mask([prev, nxt]) if prev.shape[1] else interlacing_mask([nxt])

    def fill(ok):
        a, b = prev[ok], nxt[ok]
        jump = b.sum(axis=1) - a.sum(axis=1)
        if p.beta == 2:
            out = (float(np.log(pi + ph).sum()) + (n - b.shape[1]) * _sum_log(b)
                   - (n - a.shape[1]) * _sum_log(a) + _log_vdm_rows(b) - _log_vdm_rows(a) - ph * jump)
        else:
            e_next, e_prev = _beta1_exponents(m, n)
            out = (0.5 * float(np.log(pi + ph).sum()) + beta1_kernel_constant(m, n) - 0.5 * ph * jump
                   + e_next * _sum_log(b) - e_prev * _sum_log(a)
                   + _log_vdm_rows(b) - 0.5 * _log_cross_rows(b, a))
        return out + _log_h(b, p, quad) - _log_h(a, p, quad)

    return _finish(_masked(mask, fill), batched)


def log_kernel_wishart_ordinary(mu_prev, mu_next, m: int, n: int):
    """β=1 kernel of the ordinary Wishart chain (all π = 1, all π̂ = 0)."""
    nxt = np.asarray(mu_next, dtype=float)
    batched = nxt.ndim == 2
    nxt = -np.sort(-np.atleast_2d(nxt), axis=1)
    prev = _prev_level(mu_prev, nxt.shape[0])
    mask = interlacing_mask([prev, nxt]) if prev.shape[1] else interlacing_mask([nxt])
    e_next, e_prev = _beta1_exponents(m, n)

    def fill(ok):
        a, b = prev[ok], nxt[ok]
        return (beta1_kernel_constant(m, n) - 0.5 * (b.sum(axis=1) - a.sum(axis=1))
                + e_next * _sum_log(b) - e_prev * _sum_log(a)
                + _log_vdm_rows(b) - 0.5 * _log_cross_rows(b, a))

    return _finish(_masked(mask, fill), batched)


def logdens_wishart_eigen(lam, A: int, n: int, beta: int):
    """Laguerre log density of the eigenvalues of X*X, X an A×n standard Gaussian matrix."""
    check_beta(beta)
    arr = np.asarray(lam, dtype=float)
    batched = arr.ndim == 2
    top = -np.sort(-np.atleast_2d(arr), axis=1)
    expo = beta / 2.0 * (A - n + 1) - 1.0
    rate = 1.0 if beta == 2 else 0.5

    def fill(ok):
        t = top[ok]
        return beta * _log_vdm_rows(t) - rate * t.sum(axis=1) + expo * _sum_log(t)

    return _finish(_masked(interlacing_mask([top]), fill), batched)


# ---------------------------------------------------------------------------
# Jacobi and Heckman-Opdam ensembles
# ---------------------------------------------------------------------------

def logdens_jacobi(levels: LevelsLike, p: JacobiParams):
    """
    Unnormalized joint log density of the Jacobi corners λ^1 ≺ ... ≺ λ^m in (0, 1).

    β=2: Δ(λ^m) ∏(λ^m)^{A+m-n-1} (1-λ^m)^{n-m} ∏_{l<m} ∏ (λ^l)^{-2}
    β=1: Δ(λ^m) ∏(λ^m)^{(A+m-n-2)/2} (1-λ^m)^{(n-m-1)/2} ∏_{l<m} [∏ (λ^l)^{-1} Δ(λ^l) Δ(λ^l, λ^{l+1})^{-1/2}]
    """
    arrays, batched = as_level_arrays(levels)
    m = len(arrays)
    for l, lvl in enumerate(arrays, start=1):
        if lvl.shape[1] != l:
            raise ValidationError(f"Jacobi level {l} has {lvl.shape[1]} entries")
    if m > p.n:
        raise ValidationError(f"Jacobi levels stop at n={p.n}, got {m}")
    A, n = p.A, p.n

    def fill(ok):
        lv = [a[ok] for a in arrays]
        top = lv[-1]
        inner = sum((_sum_log(a) for a in lv[:-1]), np.zeros(top.shape[0]))
        out = _log_vdm_rows(top)
        with np.errstate(divide="ignore"):
            one_minus = np.log1p(-top).sum(axis=1)
        if p.beta == 2:
            return out + (A + m - n - 1) * _sum_log(top) + (n - m) * one_minus - 2.0 * inner
        out = out + 0.5 * (A + m - n - 2) * _sum_log(top) + 0.5 * (n - m - 1) * one_minus - inner
        for lo, up in zip(lv, lv[1:]):
            out = out + _log_vdm_rows(lo) - 0.5 * _log_cross_rows(lo, up)
        return out

    return _finish(_masked(interlacing_mask(arrays, upper=1.0), fill), batched)


def transform_jacobi_to_ho(levels: LevelsLike):
    """
    μ = -log λ on every level, with the log-Jacobian Σ log λ = -Σ μ.

    Returns:
        (levels in μ, log-Jacobian); a MultilevelSample input gives a MultilevelSample
        and a float, a batch gives arrays
    """
    sample_in = levels if isinstance(levels, MultilevelSample) else None
    arrays, batched = as_level_arrays(levels)
    for lvl in arrays:
        if np.any(lvl <= 0) or np.any(lvl > 1):
            raise ValidationError("Jacobi levels must lie in (0, 1] for the logarithmic transform")
    mu = [-np.log(lvl)[:, ::-1] for lvl in arrays]
    log_jac = sum(np.log(lvl).sum(axis=1) for lvl in arrays)
    if sample_in is not None:
        out = MultilevelSample([Spectrum.of(a[0]) for a in mu], sample_in.n, model="ho",
                               seed=sample_in.seed, draw_index=sample_in.draw_index)
        return out, float(log_jac[0])
    if batched:
        return mu, log_jac
    return [a[0] for a in mu], float(log_jac[0])


def _ho_gamma_const(pi: np.ndarray, pi_hat: np.ndarray, theta: float) -> float:
    x = theta * (pi[None, :] + pi_hat[:, None])
    return float((gammaln(theta + x) - gammaln(x)).sum())


def _log_trig(top: np.ndarray) -> np.ndarray:
    return 0.5 * (top.shape[1] - 1) * top.sum(axis=1) + _log_vdm_rows(top, True)


def logdens_ho_joint(levels: LevelsLike, pi: Sequence[float], pi_hat: Sequence[float], theta: float,
                     quad: Optional[QuadSpec] = None):
    """Unnormalized joint log density of the Heckman-Opdam ensemble."""
    arrays, batched = as_level_arrays(levels)
    pi = np.asarray(pi, dtype=float)
    n = pi.size
    _check_levels(arrays, n)
    m = len(arrays)
    k = min(m, n)
    ph = np.array([pi_hat[l] if l < len(pi_hat) else 0.0 for l in range(m)])
    quad = quad or QuadSpec()
    const = _ho_gamma_const(pi, ph, theta)

    def fill(ok):
        lv = [a[ok] for a in arrays]
        top = lv[-1]
        out = (const + theta * _log_trig(top) + theta * (n - k) * log1mexp(top).sum(axis=1)
               + (theta - 1.0) * (log1mexp(lv[k - 1]).sum(axis=1) - log1mexp(top).sum(axis=1))
               - theta * _pi_hat_increments(lv, ph) + (theta - 1.0) * _interlace_terms(lv, True))
        return out + log_ho_batch(top, -theta * pi, theta, quad, conjugate=True).log_value

    return _finish(_masked(interlacing_mask(arrays), fill), batched)


def logdens_ho_marginal(mu, m: int, pi: Sequence[float], pi_hat: Sequence[float], theta: float,
                        quad: Optional[QuadSpec] = None):
    """Unnormalized log density of the level-m marginal of the Heckman-Opdam ensemble."""
    arr = np.asarray(mu, dtype=float)
    batched = arr.ndim == 2
    top = -np.sort(-np.atleast_2d(arr), axis=1)
    pi = np.asarray(pi, dtype=float)
    n = pi.size
    k = min(m, n)
    if top.shape[1] != k:
        raise ValidationError(f"Level {m} has {top.shape[1]} entries, expected {k}")
    ph = np.array([pi_hat[l] if l < len(pi_hat) else 0.0 for l in range(m)])
    quad = quad or QuadSpec()
    const = _ho_gamma_const(pi, ph, theta)

    def fill(ok):
        t = top[ok]
        out = const + 2 * theta * _log_trig(t) + theta * (max(n, m) - k) * log1mexp(t).sum(axis=1)
        out = out + log_ho_batch(t, -theta * ph, theta, quad).log_value
        return out + log_ho_batch(t, -theta * pi, theta, quad, conjugate=True).log_value

    return _finish(_masked(interlacing_mask([top]), fill), batched)


class NormalizationCache:
    """Write-once map from (density id, parameters) to (log normalization, error)."""

    def __init__(self):
        self._values: Dict[Hashable, Tuple[float, float]] = {}
        self._lock = threading.Lock()

    def get_or_compute(self, key: Hashable, compute: Callable[[], Tuple[float, float]]) -> Tuple[float, float]:
        with self._lock:
            if key in self._values:
                return self._values[key]
            value = compute()
            self._values[key] = value
            logger.debug(f"Cached normalization {key}: {value}")
            return value

    def __contains__(self, key: Hashable) -> bool:
        with self._lock:
            return key in self._values

    def __len__(self) -> int:
        return len(self._values)
