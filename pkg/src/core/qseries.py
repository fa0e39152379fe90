"""
q-Series and Macdonald Polynomials

q-Pochhammer symbols, the Macdonald norm b_λ(q, t), branching coefficients ψ and a
memoized branching-rule evaluator for P_λ and Q_λ, plus the principal
specialization and the Cauchy identity used as a consistency oracle.
"""

import logging
import math
import threading
from functools import lru_cache
from itertools import product
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

from models.params import QParams
from models.spectra import Partition, interlaces
from utils.errors import ParameterError

logger = logging.getLogger(__name__)

TAIL_CUTOFF = 1e-17


def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise ParameterError(f"q must lie in (0, 1), got {q}")


def _terms(log_start: float, log_q: float) -> int:
    # number of factors until |a q^k| drops below the cutoff
    return max(1, int(math.ceil((math.log(TAIL_CUTOFF) - log_start) / log_q)) + 1)


@lru_cache(maxsize=200_000)
def log_qpoch_power(y: float, log_q: float) -> float:
    """
    L(y) = log (q^y; q)_∞ for y ≥ 0, with ``log_q`` = log q < 0.

    The truncated tail Σ_{k≥K} log(1 - q^{y+k}) ≈ -q^{y+K}/(1 - q) is added back.
    """
    if y < 0:
        raise ParameterError(f"L(y) needs y >= 0, got {y}")
    if y == 0:
        return -math.inf
    K = _terms(y * log_q, log_q)
    k = np.arange(K, dtype=float)
    body = float(np.sum(np.log1p(-np.exp((y + k) * log_q))))
    tail = -math.exp((y + K) * log_q) / (-math.expm1(log_q))
    return body + tail


def log_qpoch_inf(a: float, q: float) -> Tuple[float, float]:
    """
    Signed log of (a; q)_∞ = ∏_{k≥0} (1 - a q^k).

    Returns:
        (sign, log|value|); sign 0 when a factor vanishes
    """
    _check_q(q)
    if a == 0:
        return 1.0, 0.0
    log_q = math.log(q)
    if abs(a) * q >= 1.0:
        raise ParameterError(f"(a; q)_inf needs |a| < 1/q, got a={a}, q={q}")
    K = _terms(math.log(abs(a)), log_q)
    factors = 1.0 - a * np.exp(np.arange(K, dtype=float) * log_q)
    if np.any(factors == 0):
        return 0.0, -math.inf
    sign = float(np.prod(np.sign(factors)))
    tail = -a * math.exp(K * log_q) / (1.0 - q)
    return sign, float(np.sum(np.log(np.abs(factors)))) + tail


def qpoch_inf(a: float, q: float) -> float:
    """(a; q)_∞ for |a| < 1/q."""
    sign, log_abs = log_qpoch_inf(a, q)
    return sign * math.exp(log_abs) if sign else 0.0


def log_qpoch_fin(a: float, q: float, k: int) -> Tuple[float, float]:
    """Signed log of (a; q)_k = ∏_{j<k} (1 - a q^j)."""
    if k < 0:
        raise ParameterError(f"Finite q-Pochhammer length must be >= 0, got {k}")
    if k == 0:
        return 1.0, 0.0
    factors = 1.0 - a * q ** np.arange(k, dtype=float)
    if np.any(factors == 0):
        return 0.0, -math.inf
    return float(np.prod(np.sign(factors))), float(np.sum(np.log(np.abs(factors))))


def qpoch_fin(a: float, q: float, k: int) -> float:
    """(a; q)_k."""
    sign, log_abs = log_qpoch_fin(a, q, k)
    return sign * math.exp(log_abs) if sign else 0.0


def log_f(x: float, y: float, qt: QParams) -> float:
    """log f(q^x t^y) with f(u) = (tu; q)_∞ / (qu; q)_∞."""
    theta = qt.theta
    return log_qpoch_power(x + theta * (y + 1), qt.log_q) - log_qpoch_power(x + 1 + theta * y, qt.log_q)


def f_ratio(u: float, qt: QParams) -> float:
    """f(u) = (tu; q)_∞ / (qu; q)_∞ for an arbitrary argument u."""
    s1, l1 = log_qpoch_inf(qt.t * u, qt.q)
    s2, l2 = log_qpoch_inf(qt.q * u, qt.q)
    return s1 * s2 * math.exp(l1 - l2)


def log_b_norm(lam: Partition, qt: QParams) -> float:
    """
    log b_λ(q, t), the ratio between Q_λ and P_λ.

    Row product form: for each row l and each i < l,
    (t^{i+1} q^{λ_{l-i} - λ_l}; q)_{λ_l - λ_{l+1}} / (t^i q^{λ_{l-i} - λ_l + 1}; q)_{λ_l - λ_{l+1}}.
    """
    q, t = qt.q, qt.t
    total = 0.0
    for l in range(1, lam.length + 1):
        run = lam.part(l - 1) - lam.part(l)
        if run == 0:
            continue
        for i in range(l):
            gap = lam.part(l - i - 1) - lam.part(l - 1)
            _, num = log_qpoch_fin(t ** (i + 1) * q ** gap, q, run)
            _, den = log_qpoch_fin(t ** i * q ** (gap + 1), q, run)
            total += num - den
    return total


def b_norm(lam: Partition, qt: QParams) -> float:
    return math.exp(log_b_norm(lam, qt))


def b_norm_armleg(lam: Partition, qt: QParams) -> float:
    """b_λ as the box product ∏ (1 - q^a t^{l+1}) / (1 - q^{a+1} t^l) over arm a, leg l."""
    conj = lam.conjugate()
    out = 1.0
    for i, row in enumerate(lam.parts):
        for j in range(row):
            arm = row - j - 1
            leg = conj.part(j) - i - 1
            out *= (1 - qt.q ** arm * qt.t ** (leg + 1)) / (1 - qt.q ** (arm + 1) * qt.t ** leg)
    return out


def _psi_full(lam: Tuple[int, ...], mu: Tuple[int, ...], m: int, qt: QParams) -> float:
    total = 0.0
    for i in range(m - 1):
        for j in range(i, m - 1):
            d = j - i
            total += (log_f(mu[i] - mu[j], d, qt) + log_f(lam[i] - lam[j + 1], d, qt)
                      - log_f(mu[i] - lam[j + 1], d, qt) - log_f(lam[i] - mu[j], d, qt))
    return total


def _psi_truncated(lam: Tuple[int, ...], mu: Tuple[int, ...], n: int, qt: QParams) -> float:
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d = j - i
            total += (log_f(mu[i] - mu[j], d, qt) + log_f(lam[i] - lam[j], d - 1, qt)
                      - log_f(lam[i] - mu[j], d, qt) - log_f(mu[i] - lam[j], d - 1, qt))
    for i in range(n):
        total += log_f(0, 0, qt) - log_f(lam[i] - mu[i], 0, qt)
        total += log_f(lam[i], n - 1 - i, qt) - log_f(mu[i], n - 1 - i, qt)
    return total


def psi_branch(lam: Partition, mu: Partition, m: int, qt: QParams, formula: str = "auto") -> float:
    """
    Branching coefficient ψ^m_{λ/μ}(q, t) in P_λ(x_1..x_m) = Σ_μ ψ P_μ(x_1..x_{m-1}) x_m^{|λ|-|μ|}.

    Args:
        lam: Partition with at most m parts
        mu: Partition with at most m-1 parts
        m: Number of variables
        qt: Macdonald parameters
        formula: "full", "truncated" (needs ℓ(λ) < m) or "auto"

    Returns:
        ψ, or 0 when μ does not interlace λ
    """
    if m < 1:
        raise ParameterError(f"m must be positive, got {m}")
    if lam.length > m or mu.length > m - 1:
        return 0.0
    lam_p = lam.padded(m)
    mu_p = mu.padded(m - 1)
    if not interlaces(mu_p, lam_p):
        return 0.0
    n = lam.length
    if formula == "auto":
        formula = "full" if n == m else "truncated"
    if formula == "full":
        return math.exp(_psi_full(lam_p, mu_p, m, qt))
    if formula == "truncated":
        if n >= m:
            raise ParameterError("The truncated branching formula needs ℓ(λ) < m")
        return math.exp(_psi_truncated(lam.padded(n), mu.padded(n), n, qt))
    raise ParameterError(f"Unknown branching formula: {formula}")


def interlacing_partitions(lam: Partition, k: int) -> Iterator[Partition]:
    """Partitions μ ≺ λ with at most k - 1 parts (λ has at most k parts)."""
    width = min(lam.length, k - 1)
    ranges = [range(lam.part(i + 1), lam.part(i) + 1) for i in range(width)]
    for parts in product(*ranges):
        yield Partition(parts)


def enumerate_partitions(max_size: int, max_length: int) -> Iterator[Partition]:
    """All partitions with |λ| ≤ max_size and ℓ(λ) ≤ max_length."""

    def rec(remaining: int, cap: int, slots: int) -> Iterator[Tuple[int, ...]]:
        yield ()
        if slots == 0:
            return
        for first in range(min(remaining, cap), 0, -1):
            for rest in rec(remaining - first, first, slots - 1):
                yield (first,) + rest

    for parts in rec(max_size, max_size, max_length):
        yield Partition(parts)


class MacdonaldEvaluator:
    """
    P_λ(x; q, t) through the branching rule, one variable at a time.

    Values are memoized per (λ, x_1..x_k); the cache is shared across threads.
    """

    def __init__(self, qt: QParams, formula: str = "auto"):
        self.qt = qt
        self.formula = formula
        self._cache: Dict[Tuple[Tuple[int, ...], Tuple[float, ...]], float] = {}
        self._lock = threading.Lock()

    def P(self, lam: Partition, x: Sequence[float]) -> float:
        x = tuple(float(v) for v in x)
        if lam.length > len(x):
            return 0.0
        if not x:
            return 1.0
        key = (lam.parts, x)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        k = len(x)
        xk = x[-1]
        value = 0.0
        for mu in interlacing_partitions(lam, k):
            inner = self.P(mu, x[:-1])
            if inner == 0.0:
                continue
            value += psi_branch(lam, mu, k, self.qt, self.formula) * inner * xk ** (lam.size - mu.size)
        with self._lock:
            self._cache[key] = value
        return value

    def Q(self, lam: Partition, x: Sequence[float]) -> float:
        return b_norm(lam, self.qt) * self.P(lam, x)

    def clear(self) -> None:
        with self._lock:
            self._cache.clear()


def macdonald_P(lam: Partition, x: Sequence[float], qt: QParams) -> float:
    return MacdonaldEvaluator(qt).P(lam, x)


def macdonald_Q(lam: Partition, x: Sequence[float], qt: QParams) -> float:
    return MacdonaldEvaluator(qt).Q(lam, x)


def log_principal_eval(lam: Partition, m: int, qt: QParams) -> float:
    """log P_λ(1, t, ..., t^{m-1}; q, t) from the closed-form product."""
    if lam.length > m:
        return -math.inf
    n = lam.length
    theta, log_q = qt.theta, qt.log_q
    L = lambda y: log_qpoch_power(y, log_q)
    total = theta * log_q * sum(i * lam.part(i) for i in range(n))
    for i in range(n):
        for j in range(i + 1, m):
            d = j - i
            gap = lam.part(i) - lam.part(j)
            total += L(gap + theta * d) - L(gap + theta * (d + 1))
            total += L(theta * (d + 1)) - L(theta * d)
    return total


def principal_eval(lam: Partition, m: int, qt: QParams) -> float:
    return math.exp(log_principal_eval(lam, m, qt))


def cauchy_partial_sum(x: Sequence[float], y: Sequence[float], qt: QParams, max_degree: int) -> float:
    """Σ_{|λ| ≤ max_degree} P_λ(x) Q_λ(y)."""
    evaluator = MacdonaldEvaluator(qt)
    length = min(len(x), len(y))
    return sum(evaluator.P(lam, x) * evaluator.Q(lam, y)
               for lam in enumerate_partitions(max_degree, length))


def cauchy_product(x: Sequence[float], y: Sequence[float], qt: QParams) -> float:
    """∏_{i,j} (t x_i y_j; q)_∞ / (x_i y_j; q)_∞."""
    out = 0.0
    for xi in x:
        for yj in y:
            _, num = log_qpoch_inf(qt.t * xi * yj, qt.q)
            _, den = log_qpoch_inf(xi * yj, qt.q)
            out += num - den
    return math.exp(out)
