"""
Cauchy Identities

Numerical left-hand sides of the Bessel and Heckman-Opdam Cauchy identities,
integrating over λ_1 ≥ ... ≥ λ_n ≥ 0, against their Gamma-product right-hand sides.
For n = m = 1 the integral is a scalar Gamma integral done adaptively; otherwise
an outer tanh-sinh rule on the ordered region is combined with batched special
function evaluations.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from core.hyperfun import _log_vdm_rows, log1mexp, log_bessel_batch, log_ho_batch
from core.quadrature import ordered_nodes
from models.params import QuadSpec
from utils.errors import ParameterError
from utils.logger import log_function_call

logger = logging.getLogger(__name__)

TAIL_DECAY = 36.0
MAX_OUTER_N = 2


@dataclass
class CauchyResult:
    """Both sides of a Cauchy identity in log form."""
    identity: str
    log_lhs: float
    log_rhs: float
    nodes: int
    route: str

    @property
    def rel_error(self) -> float:
        return abs(math.expm1(self.log_lhs - self.log_rhs))

    def to_dict(self):
        return {'identity': self.identity, 'lhs': math.exp(self.log_lhs), 'rhs': math.exp(self.log_rhs),
                'rel_error': self.rel_error, 'nodes': self.nodes, 'route': self.route}


def _gamma_constant(n: int, m: int, theta: float) -> float:
    return float(sum(gammaln(k * theta) for k in range(m - n + 1, m + 1))
                 + sum(gammaln(k * theta) for k in range(1, n + 1)) - 2 * n * gammaln(theta))


def _check(n: int, m: int, s: np.ndarray, r: np.ndarray) -> None:
    if not 1 <= n <= m:
        raise ParameterError(f"Cauchy identities need 1 <= n <= m, got n={n}, m={m}")
    if s.size != m or r.size != n:
        raise ParameterError(f"Need len(s) = m = {m} and len(r) = n = {n}")
    if n > MAX_OUTER_N:
        raise ParameterError(f"Outer quadrature supports n <= {MAX_OUTER_N}")


def _scalar_integral(f, theta: float) -> float:
    """∫_0^∞ λ^{θ-1} f(λ) dλ with the algebraic endpoint handled by QUADPACK."""
    head, _ = integrate.quad(f, 0.0, 1.0, weight="alg", wvar=(theta - 1.0, 0.0),
                             epsabs=0.0, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(lambda x: x ** (theta - 1.0) * f(x), 1.0, np.inf,
                             epsabs=0.0, epsrel=1e-13, limit=200)
    return head + tail


def mvb_rhs(n: int, m: int, theta: float, s: Sequence[float], r: Sequence[float]) -> float:
    """log of the Bessel Cauchy product side."""
    s, r = np.asarray(s, dtype=float), np.asarray(r, dtype=float)
    return _gamma_constant(n, m, theta) - theta * float(np.log(s[:, None] + r[None, :]).sum())


def ho_rhs(n: int, m: int, theta: float, s: Sequence[float], r: Sequence[float]) -> float:
    """log of the Heckman-Opdam Cauchy product side."""
    s, r = np.asarray(s, dtype=float), np.asarray(r, dtype=float)
    x = -(s[:, None] + r[None, :])
    return _gamma_constant(n, m, theta) + float((gammaln(x) - gammaln(theta + x)).sum())


@log_function_call
def cauchy_mvb(n: int, m: int, theta: float, s: Sequence[float], r: Sequence[float],
               quad: QuadSpec = QuadSpec()) -> CauchyResult:
    """
    ∫ B^{n,m}(λ, -s) B̃^{n,n}(λ, -r) Δ(λ)^{2θ} ∏ λ^{θ(m-n)} dλ against its product side.

    Requires s_i + r_j > 0.
    """
    s, r = np.asarray(s, dtype=float), np.asarray(r, dtype=float)
    _check(n, m, s, r)
    rate = float(np.min(s[:, None] + r[None, :]))
    if rate <= 0:
        raise ParameterError("The Bessel Cauchy identity needs s_i + r_j > 0")
    rhs = mvb_rhs(n, m, theta, s, r)

    if n == 1 and m == 1:
        def f(x):
            tops = np.array([[x]])
            return math.exp(log_bessel_batch(tops, -s, theta, quad).log_value[0]
                            + log_bessel_batch(tops, -r, theta, quad).log_value[0] - gammaln(theta))
        value = _scalar_integral(f, theta)
        return CauchyResult("cauchy-mvb", math.log(value), rhs, 0, "scalar")

    points, logw = ordered_nodes(n, 0.0, TAIL_DECAY / rate, 2 * quad.order, quad.t_max)
    log_int = (log_bessel_batch(points, -s, theta, quad).log_value
               + log_bessel_batch(points, -r, theta, quad, conjugate=True).log_value
               + 2 * theta * _log_vdm_rows(points) + theta * (m - n) * np.log(points).sum(axis=1))
    lhs = float(logsumexp(logw + log_int))
    logger.debug(f"cauchy-mvb n={n} m={m} theta={theta}: {points.shape[0]} outer nodes")
    return CauchyResult("cauchy-mvb", lhs, rhs, int(points.shape[0]), "outer-tanh-sinh")


@log_function_call
def cauchy_ho(n: int, m: int, theta: float, s: Sequence[float], r: Sequence[float],
              quad: QuadSpec = QuadSpec()) -> CauchyResult:
    """
    ∫ F^{n,m}(λ, s) F̃^{n,n}(λ, r) Δ^trig(λ)^{2θ} ∏ (1 - e^{-λ})^{θ(m-n)} dλ against its product side.

    Integrability needs s_i + r_j < 0.
    """
    s, r = np.asarray(s, dtype=float), np.asarray(r, dtype=float)
    _check(n, m, s, r)
    rate = float(np.min(-(s[:, None] + r[None, :])))
    if rate <= 0:
        raise ParameterError("The Heckman-Opdam Cauchy identity needs s_i + r_j < 0")
    rhs = ho_rhs(n, m, theta, s, r)

    if n == 1 and m == 1:
        def f(x):
            # (1 - e^{-x})^{θ-1} = x^{θ-1} ((1 - e^{-x})/x)^{θ-1}
            ratio = -math.expm1(-x) / x if x > 0 else 1.0
            return math.exp((s[0] + r[0]) * x - gammaln(theta)) * ratio ** (theta - 1.0)
        value = _scalar_integral(f, theta)
        return CauchyResult("cauchy-ho", math.log(value), rhs, 0, "scalar")

    points, logw = ordered_nodes(n, 0.0, TAIL_DECAY / rate, 2 * quad.order, quad.t_max)
    log_trig = 0.5 * (n - 1) * points.sum(axis=1) + _log_vdm_rows(points, True)
    log_int = (log_ho_batch(points, s, theta, quad).log_value
               + log_ho_batch(points, r, theta, quad, conjugate=True).log_value
               + 2 * theta * log_trig + theta * (m - n) * log1mexp(points).sum(axis=1))
    lhs = float(logsumexp(logw + log_int))
    return CauchyResult("cauchy-ho", lhs, rhs, int(points.shape[0]), "outer-tanh-sinh")
