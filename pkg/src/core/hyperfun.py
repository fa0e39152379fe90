"""
Multivariate Special Functions

Multivariate Bessel functions B^{n,m}(λ, s) and Heckman-Opdam functions F^{n,m}(λ, s)
as integrals over the Gelfand-Tsetlin polytope below λ, their conjugates B̃ and F̃,
Vandermonde products and the HCIZ orbit integral by three independent routes.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from core.linalg import sample_haar_batch
from core.quadrature import GTResult, gt_dimension, gt_integrate
from models.params import HyperParams, QuadSpec
from models.spectra import LogValue, Spectrum
from utils.errors import DegenerateInputError, ParameterError
from utils.logger import log_function_call

logger = logging.getLogger(__name__)

HAAR_CHUNK = 10_000


@dataclass
class SpecialValue:
    """A positive special-function value kept in log form with a relative error estimate."""

    log_value: float
    rel_error: float = 0.0
    nodes: int = 0

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    def converged(self, tolerance: float) -> bool:
        return self.rel_error <= tolerance


# ---------------------------------------------------------------------------
# Vandermonde products
# ---------------------------------------------------------------------------

def vandermonde(lam: Sequence[float]) -> LogValue:
    """log Δ(λ) = Σ_{i<j} log(λ_i - λ_j) for λ sorted decreasingly; ties give zero."""
    vals = Spectrum.of(lam).values
    total = 0.0
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            gap = vals[i] - vals[j]
            if gap <= 0:
                return LogValue.zero()
            total += math.log(gap)
    return LogValue(total)


def cross_vandermonde(mu: Sequence[float], lam: Sequence[float]) -> LogValue:
    """log Δ(μ, λ) = Σ_{i,j} log|μ_i - λ_j|."""
    total = 0.0
    for x in mu:
        for y in lam:
            if x == y:
                return LogValue.zero()
            total += math.log(abs(x - y))
    return LogValue(total)


def vandermonde_trig(lam: Sequence[float]) -> LogValue:
    """log Δ^trig(λ) = Σ_{i<j} log 2 sinh((λ_i - λ_j)/2)."""
    vals = Spectrum.of(lam).values
    total = 0.0
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            gap = vals[i] - vals[j]
            if gap <= 0:
                return LogValue.zero()
            total += gap / 2.0 + math.log(-math.expm1(-gap))
    return LogValue(total)


def log1mexp(x: np.ndarray) -> np.ndarray:
    """log(1 - e^{-x}) for x > 0."""
    with np.errstate(divide="ignore"):
        return np.log(-np.expm1(-np.asarray(x, dtype=float)))


def _pair_logs(a: np.ndarray, b: np.ndarray, exponential: bool) -> np.ndarray:
    diff = np.abs(a[:, :, None] - b[:, None, :])
    with np.errstate(divide="ignore"):
        if exponential:
            low = np.minimum(a[:, :, None], b[:, None, :])
            return -low + np.log(-np.expm1(-diff))
        return np.log(diff)


def _log_vdm_rows(a: np.ndarray, exponential: bool = False) -> np.ndarray:
    k = a.shape[1]
    if k < 2:
        return np.zeros(a.shape[0])
    logs = _pair_logs(a, a, exponential)
    iu = np.triu_indices(k, 1)
    return logs[:, iu[0], iu[1]].sum(axis=1)


def _log_cross_rows(a: np.ndarray, b: np.ndarray, exponential: bool = False) -> np.ndarray:
    return _pair_logs(a, b, exponential).reshape(a.shape[0], -1).sum(axis=1)


# ---------------------------------------------------------------------------
# GT integrands
# ---------------------------------------------------------------------------

def _level_sums(levels: List[np.ndarray]) -> List[np.ndarray]:
    return [lvl.sum(axis=1) for lvl in levels]


def bessel_log_integrand(s: Sequence[float], theta: float):
    """Log weight of φ_θ(λ, s) on GT patterns (levels[l-1] has min(l, n) entries)."""
    s = np.asarray(s, dtype=float)

    def weight(levels: List[np.ndarray]) -> np.ndarray:
        m = len(levels)
        n = levels[-1].shape[1]
        sums = _level_sums(levels)
        total = s[0] * sums[0]
        for l in range(1, m):
            total = total + s[l] * (sums[l] - sums[l - 1])
        if theta != 1.0:
            with np.errstate(divide="ignore"):
                corr = np.log(levels[n - 1]).sum(axis=1) - np.log(levels[-1]).sum(axis=1)
            for l in range(m - 1):
                corr = corr + (_log_cross_rows(levels[l], levels[l + 1])
                               - _log_vdm_rows(levels[l]) - _log_vdm_rows(levels[l + 1]))
            total = total + (theta - 1.0) * corr
        return total

    return weight


def ho_log_integrand(s: Sequence[float], theta: float):
    """Log weight of Φ_θ(λ, s), the trigonometric analogue of the Bessel weight."""
    s = np.asarray(s, dtype=float)

    def weight(levels: List[np.ndarray]) -> np.ndarray:
        m = len(levels)
        n = levels[-1].shape[1]
        sums = _level_sums(levels)
        total = s[0] * sums[0]
        for l in range(1, m):
            total = total + s[l] * (sums[l] - sums[l - 1])
        if theta != 1.0:
            corr = log1mexp(levels[n - 1]).sum(axis=1) - log1mexp(levels[-1]).sum(axis=1)
            for l in range(m - 1):
                corr = corr + (_log_cross_rows(levels[l], levels[l + 1], True)
                               - _log_vdm_rows(levels[l], True) - _log_vdm_rows(levels[l + 1], True)
                               + sums[l])
            total = total + (theta - 1.0) * corr
        return total

    return weight


def _gamma_prefactor(n: int, m: int, theta: float) -> float:
    """log [Γ(mθ) ⋯ Γ((m-n+1)θ) / Γ(θ)^n]."""
    return float(sum(gammaln(k * theta) for k in range(m - n + 1, m + 1)) - n * gammaln(theta))


def _check_tops(tops: np.ndarray) -> None:
    if tops.shape[1] == 0:
        return
    if np.any(tops <= 0):
        raise ParameterError("Quadrature routes need strictly positive λ")
    if tops.shape[1] > 1 and np.any(np.diff(tops, axis=1) >= 0):
        raise DegenerateInputError("Quadrature routes need strictly decreasing λ")


def _integrate(kind: str, tops: np.ndarray, s: Sequence[float], theta: float,
               quad: QuadSpec, rng: Optional[np.random.Generator]) -> GTResult:
    m = len(s)
    weight = bessel_log_integrand(s, theta) if kind == "bessel" else ho_log_integrand(s, theta)
    result = gt_integrate(weight, tops, m, quad, rng)
    dim = gt_dimension(tops.shape[1], m)
    result.log_value = result.log_value - dim * gammaln(theta)
    return result


@dataclass
class SpecialBatch:
    """Per-row log values and relative errors of a batched evaluation."""
    log_value: np.ndarray
    rel_error: np.ndarray


def log_phi_batch(tops, s: Sequence[float], theta: float, quad: QuadSpec,
                  rng: Optional[np.random.Generator] = None) -> SpecialBatch:
    """log φ_θ(λ, s) for each row of ``tops``."""
    tops = np.atleast_2d(np.asarray(tops, dtype=float))
    _check_tops(tops)
    res = _integrate("bessel", tops, s, theta, quad, rng)
    return SpecialBatch(res.log_value, res.rel_error)


@log_function_call
def log_bessel_batch(tops, s: Sequence[float], theta: float, quad: QuadSpec,
                     conjugate: bool = False, fast: bool = True,
                     rng: Optional[np.random.Generator] = None) -> SpecialBatch:
    """
    log B^{n,m}(λ, s) (or log B̃ when ``conjugate``) for each row λ of ``tops``.

    Args:
        tops: (P, n) array of strictly decreasing positive rows
        s: Parameter vector of length m ≥ n
        theta: β/2
        quad: Quadrature settings
        conjugate: Return B̃ = Γ(θ)^{-n} ∏ λ^{θ-1} B
        fast: Use the exact closed forms where they exist
        rng: Generator for the Monte Carlo scheme

    Returns:
        SpecialBatch of log values and relative error estimates
    """
    tops = np.atleast_2d(np.asarray(tops, dtype=float))
    P, n = tops.shape
    s = np.asarray(s, dtype=float)
    m = s.size
    if n > m:
        raise ParameterError(f"B^{{n,m}} needs n <= m, got n={n}, m={m}")
    sums = tops.sum(axis=1)

    if n == 0:
        base = SpecialBatch(np.zeros(P), np.zeros(P))
    elif fast and np.all(s == s[0]):
        base = SpecialBatch(s[0] * sums, np.zeros(P))
    else:
        _check_tops(tops)
        res = _integrate("bessel", tops, s, theta, quad, rng)
        log_b = (_gamma_prefactor(n, m, theta) + res.log_value
                 - theta * _log_vdm_rows(tops) - theta * (m - n) * np.log(tops).sum(axis=1))
        base = SpecialBatch(log_b, res.rel_error)

    if conjugate and n > 0:
        with np.errstate(divide="ignore"):
            shift = -n * gammaln(theta) + (theta - 1.0) * np.log(tops).sum(axis=1)
        base = SpecialBatch(base.log_value + shift, base.rel_error)
    return base


@log_function_call
def log_ho_batch(tops, s: Sequence[float], theta: float, quad: QuadSpec,
                 conjugate: bool = False, fast: bool = True,
                 rng: Optional[np.random.Generator] = None) -> SpecialBatch:
    """log F^{n,m}(λ, s) (or log F̃) for each row λ of ``tops``."""
    tops = np.atleast_2d(np.asarray(tops, dtype=float))
    P, n = tops.shape
    s = np.asarray(s, dtype=float)
    m = s.size
    if n > m:
        raise ParameterError(f"F^{{n,m}} needs n <= m, got n={n}, m={m}")

    if n == 0:
        base = SpecialBatch(np.zeros(P), np.zeros(P))
    elif fast and n == 1 and m == 1:
        base = SpecialBatch(s[0] * tops[:, 0], np.zeros(P))
    else:
        _check_tops(tops)
        res = _integrate("ho", tops, s, theta, quad, rng)
        log_trig = 0.5 * (n - 1) * tops.sum(axis=1) + _log_vdm_rows(tops, True)
        log_f = (_gamma_prefactor(n, m, theta) + res.log_value
                 - theta * log_trig - theta * (m - n) * log1mexp(tops).sum(axis=1))
        base = SpecialBatch(log_f, res.rel_error)

    if conjugate and n > 0:
        shift = -n * gammaln(theta) + (theta - 1.0) * log1mexp(tops).sum(axis=1)
        base = SpecialBatch(base.log_value + shift, base.rel_error)
    return base


def _single(batch: SpecialBatch, nodes: int = 0) -> SpecialValue:
    return SpecialValue(float(batch.log_value[0]), float(batch.rel_error[0]), nodes)


def _tops_of(params: HyperParams) -> np.ndarray:
    return np.asarray(params.lam, dtype=float).reshape(1, params.n)


def phi(params: HyperParams, quad: Optional[QuadSpec] = None) -> SpecialValue:
    """φ_θ(λ, s), the raw polytope integral including Γ(θ)^{-dim}."""
    return _single(log_phi_batch(_tops_of(params), params.s, params.theta, quad or QuadSpec()))


def bessel_B(params: HyperParams, quad: Optional[QuadSpec] = None, fast: bool = True) -> SpecialValue:
    """B^{n,m}_β(λ, s); B(λ, 0) = 1, B(∅, s) = 1 and B(0, s) = 1 are exact."""
    if params.n > 0 and all(v == 0 for v in params.lam):
        return SpecialValue(0.0)
    return _single(log_bessel_batch(_tops_of(params), params.s, params.theta, quad or QuadSpec(), fast=fast))


def bessel_B_tilde(params: HyperParams, quad: Optional[QuadSpec] = None) -> SpecialValue:
    return _single(log_bessel_batch(_tops_of(params), params.s, params.theta, quad or QuadSpec(), conjugate=True))


def ho_Phi(params: HyperParams, quad: Optional[QuadSpec] = None) -> SpecialValue:
    """Φ_θ(λ, s), the trigonometric polytope integral."""
    tops = _tops_of(params)
    _check_tops(tops)
    res = _integrate("ho", tops, params.s, params.theta, quad or QuadSpec(), None)
    return SpecialValue(float(res.log_value[0]), float(res.rel_error[0]), res.nodes)


def ho_F(params: HyperParams, quad: Optional[QuadSpec] = None) -> SpecialValue:
    """F^{n,m}_β(λ, s)."""
    return _single(log_ho_batch(_tops_of(params), params.s, params.theta, quad or QuadSpec()))


def ho_F_tilde(params: HyperParams, quad: Optional[QuadSpec] = None) -> SpecialValue:
    return _single(log_ho_batch(_tops_of(params), params.s, params.theta, quad or QuadSpec(), conjugate=True))


# ---------------------------------------------------------------------------
# HCIZ
# ---------------------------------------------------------------------------

def hciz_determinant_constant(m: int) -> float:
    """(-1)^{m(m-1)/2} ∏_{p=1}^{m-1} p!, fixed by h_a(b) → 1 as b → 0."""
    sign = -1.0 if (m * (m - 1) // 2) % 2 else 1.0
    return sign * float(np.prod([math.factorial(p) for p in range(1, m)]))


def _padded(values: Sequence[float], size: int) -> np.ndarray:
    out = np.zeros(size)
    vals = np.sort(np.asarray(values, dtype=float))[::-1]
    out[:vals.size] = vals
    return out


def _distinct(values: np.ndarray) -> bool:
    return bool(np.all(np.diff(np.sort(values)) > 0))


def _hciz_haar(a: np.ndarray, b: np.ndarray, beta: int, samples: int,
               rng: np.random.Generator) -> SpecialValue:
    N = a.size
    group = "orthogonal" if beta == 1 else "unitary"
    scale = 1.0 if beta == 2 else 0.5
    exps = []
    for start in range(0, samples, HAAR_CHUNK):
        count = min(HAAR_CHUNK, samples - start)
        U = sample_haar_batch(N, group, count, rng)
        weights = np.abs(U) ** 2
        exps.append(-scale * np.einsum("i,kij,j->k", b, weights, a))
    e = np.concatenate(exps)
    peak = float(np.max(e))
    vals = np.exp(e - peak)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(samples))
    return SpecialValue(peak + math.log(mean), se / mean, samples)


def _hciz_determinant(a: np.ndarray, b: np.ndarray) -> SpecialValue:
    if not (_distinct(a) and _distinct(b)):
        raise DegenerateInputError("Determinant route needs distinct entries in both a and b")
    N = a.size
    sign, logdet = np.linalg.slogdet(np.exp(-np.outer(a, b)))
    c = hciz_determinant_constant(N)
    total_sign = sign * math.copysign(1.0, c)
    if total_sign <= 0:
        raise DegenerateInputError("Determinant route lost its sign to cancellation")
    log_val = (logdet + math.log(abs(c)) - vandermonde(a).log_magnitude - vandermonde(b).log_magnitude)
    return SpecialValue(log_val)


def _hciz_bessel(a: np.ndarray, b: np.ndarray, beta: int, quad: QuadSpec) -> SpecialValue:
    N = a.size
    for x, y in ((a, b), (b, a)):
        nz = x[x != 0]
        if _distinct(nz):
            scale = 1.0 if beta == 2 else 0.5
            batch = log_bessel_batch(nz.reshape(1, -1), -scale * y, beta / 2.0, quad)
            return _single(batch)
    raise DegenerateInputError("Bessel route needs one argument with distinct nonzero entries")


@log_function_call
def hciz(a: Sequence[float], b: Sequence[float], beta: int, route: str = "bessel",
         quad: Optional[QuadSpec] = None, samples: int = 100_000,
         rng: Optional[np.random.Generator] = None) -> SpecialValue:
    """
    HCIZ orbit integral h^β_a(b).

    β=2 integrates e^{-Tr(U a U* b)} over the unitary group; β=1 integrates
    e^{-Tr(V a V^T b)/2} over the orthogonal group. Shorter arguments are padded
    with zeros.

    Args:
        a: Nonnegative spectrum
        b: Nonnegative spectrum
        beta: 1 or 2
        route: "haar-mc", "determinant" (β=2 only) or "bessel"
        quad: Quadrature settings for the Bessel route
        samples: Haar sample count for the Monte Carlo route
        rng: Generator for the Monte Carlo route

    Returns:
        SpecialValue with a relative error estimate (standard error for haar-mc)
    """
    if beta not in (1, 2):
        raise ParameterError(f"beta must be 1 or 2, got {beta}")
    N = max(len(a), len(b))
    if N == 0:
        return SpecialValue(0.0)
    av, bv = _padded(a, N), _padded(b, N)
    if np.any(av < 0) or np.any(bv < 0):
        raise ParameterError("HCIZ arguments must be nonnegative")
    if not np.any(av) or not np.any(bv):
        return SpecialValue(0.0)
    if N == 1:
        scale = 1.0 if beta == 2 else 0.5
        return SpecialValue(-scale * float(av[0] * bv[0]))

    if route == "haar-mc":
        return _hciz_haar(av, bv, beta, samples, rng if rng is not None else np.random.default_rng(0))
    if route == "determinant":
        if beta != 2:
            raise ParameterError("The determinant route exists only for beta=2")
        return _hciz_determinant(av, bv)
    if route == "bessel":
        return _hciz_bessel(av, bv, beta, quad or QuadSpec())
    raise ParameterError(f"Unknown HCIZ route: {route}")
