"""
Quasi-Classical Limit Checks

Registry of ε → 0 limits: q-Pochhammer and Gamma asymptotics, and the degenerations
of Macdonald polynomials (q = e^{-ε}, t = e^{-θε}) to Heckman-Opdam and Bessel
functions. Each check maps ε to a finite-ε value and a limit value; the error
trajectory must decrease and end below the check's tolerance.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from scipy.special import gammaln

from core.hyperfun import bessel_B, ho_F, ho_Phi
from core.qseries import (MacdonaldEvaluator, log_b_norm, log_f, log_principal_eval, log_qpoch_fin,
                          log_qpoch_inf, log_qpoch_power, psi_branch)
from models.params import HyperParams, QParams, QuadSpec
from models.spectra import Partition
from utils.errors import ParameterError

logger = logging.getLogger(__name__)

SCALAR_EPS = (1e-1, 1e-2, 1e-3, 1e-4)
MACDONALD_EPS = (0.1, 0.05, 0.02, 0.01, 0.005)
NOISE_FLOOR = 1e-11


def _log_delta_exp(x: Sequence[float]) -> float:
    """log Δ(e^{-x}) for decreasing x."""
    total = 0.0
    for i in range(len(x)):
        for j in range(i + 1, len(x)):
            total += math.log(math.exp(-x[j]) - math.exp(-x[i]))
    return total


def _log_cross_exp(mu: Sequence[float], lam: Sequence[float]) -> float:
    return sum(math.log(abs(math.exp(-a) - math.exp(-b))) for a in mu for b in lam)


def _log1mexp(x: float) -> float:
    return math.log(-math.expm1(-x))


def _dimension(n: int, m: int) -> int:
    return (m - n) * n + n * (n - 1) // 2


# ---------------------------------------------------------------------------
# Scalar asymptotics
# ---------------------------------------------------------------------------

def _qpoch_asymp(eps, p, quad):
    q = math.exp(-eps)
    _, num = log_qpoch_inf(q ** p['a'] * p['u'], q)
    _, den = log_qpoch_inf(q ** p['b'] * p['u'], q)
    return num - den, (p['b'] - p['a']) * math.log1p(-p['u'])


def _fin_qpoch_asymp(eps, p, quad):
    q = math.exp(-eps)
    steps = int(round(abs(p['m']) / eps))
    _, num = log_qpoch_fin(q ** p['a'] * p['u'], q, steps)
    _, den = log_qpoch_fin(q ** p['b'] * p['u'], q, steps)
    limit = (p['b'] - p['a']) * (math.log1p(-p['u']) - math.log1p(-p['u'] * math.exp(p['m'])))
    return num - den, limit


def _qgamma(eps, p, quad):
    log_q = -eps
    x = p['x']
    value = (1 - x) * math.log(-math.expm1(log_q)) + log_qpoch_power(1.0, log_q) - log_qpoch_power(x, log_q)
    return value, float(gammaln(x))


def _ratio_qpoch(eps, p, quad):
    log_q = -eps
    a, b = p['a'], p['b']
    value = log_qpoch_power(a, log_q) - log_qpoch_power(b, log_q) + (a - b) * math.log(-math.expm1(log_q))
    return value, float(gammaln(b) - gammaln(a))


def _gamma_rat(eps, p, quad):
    a, theta = p['a'], p['theta']
    value = -theta * math.log(eps) + gammaln(a / eps) - gammaln(a / eps + theta)
    return float(value), -theta * math.log(a)


def _f_lim_a(eps, p, quad):
    qt = QParams.from_epsilon(eps, p['theta'])
    u = p['u'] * qt.q ** p['a']
    _, num = log_qpoch_inf(qt.t * u, qt.q)
    _, den = log_qpoch_inf(qt.q * u, qt.q)
    return num - den, (1 - p['theta']) * math.log1p(-p['u'])


def _f_lim_b(eps, p, quad):
    qt = QParams.from_epsilon(eps, p['theta'])
    a, theta = p['a'], p['theta']
    value = log_f(a, 0, qt) + (theta - 1) * math.log(eps)
    return value, float(gammaln(1 + a) - gammaln(theta + a))


# ---------------------------------------------------------------------------
# Macdonald degenerations
# ---------------------------------------------------------------------------

def _mac_eval_lim(eps, p, quad):
    n, m, theta, lam = p['n'], p['m'], p['theta'], p['lam']
    qt = QParams.from_epsilon(eps, theta)
    part = Partition.scaled(lam, eps)
    value = theta * _dimension(n, m) * math.log(eps) + log_principal_eval(part, m, qt)
    limit = (n * gammaln(theta) - sum(gammaln(k * theta) for k in range(m - n + 1, m + 1))
             + theta * _log_delta_exp(lam) + theta * (m - n) * sum(_log1mexp(x) for x in lam))
    return value, float(limit)


def _branch_limit(lam, mu, theta):
    return (theta - 1) * (_log_cross_exp(mu, lam) - _log_delta_exp(mu) - _log_delta_exp(lam) + sum(mu))


def _mac_branch_lim(eps, p, quad):
    m, theta, lam, mu = p['m'], p['theta'], p['lam'], p['mu']
    if len(lam) != m:
        raise ParameterError("mac-branch-lim needs ℓ(λ) = m")
    qt = QParams.from_epsilon(eps, theta)
    psi = psi_branch(Partition.scaled(lam, eps), Partition.scaled(mu, eps), m, qt)
    value = (theta - 1) * (m - 1) * math.log(eps) + math.log(psi)
    return value, float((1 - m) * gammaln(theta) + _branch_limit(lam, mu, theta))


def _mac_tbranch_lim(eps, p, quad):
    n, m, theta, lam, mu = p['n'], p['m'], p['theta'], p['lam'], p['mu']
    if len(lam) != n or n >= m:
        raise ParameterError("mac-tbranch-lim needs ℓ(λ) = n < m")
    qt = QParams.from_epsilon(eps, theta)
    psi = psi_branch(Partition.scaled(lam, eps), Partition.scaled(mu, eps), m, qt)
    value = (theta - 1) * n * math.log(eps) + math.log(psi)
    limit = (-n * gammaln(theta) + _branch_limit(lam, mu, theta)
             + (theta - 1) * (sum(_log1mexp(x) for x in mu) - sum(_log1mexp(x) for x in lam)))
    return value, float(limit)


def _b_ho_scaling(eps, p, quad):
    n, theta, lam = p['n'], p['theta'], p['lam']
    qt = QParams.from_epsilon(eps, theta)
    value = n * (theta - 1) * math.log(eps) + log_b_norm(Partition.scaled(lam, eps), qt)
    limit = -n * gammaln(theta) + (theta - 1) * sum(_log1mexp(x) for x in lam)
    return value, float(limit)


def _log_P_exp(eps, p, qt):
    x = [math.exp(eps * s) for s in p['s']]
    return math.log(MacdonaldEvaluator(qt).P(Partition.scaled(p['lam'], eps), x))


def _hyper(p, quad) -> HyperParams:
    return HyperParams(p['n'], p['m'], p['theta'], p['lam'], p['s'])


def _mac_lim(eps, p, quad):
    n, m, theta = p['n'], p['m'], p['theta']
    qt = QParams.from_epsilon(eps, theta)
    value = theta * _dimension(n, m) * math.log(eps) + _log_P_exp(eps, p, qt)
    return value, ho_Phi(_hyper(p, quad), quad).log_value


def _mac_q_lim(eps, p, quad):
    n, m, theta = p['n'], p['m'], p['theta']
    qt = QParams.from_epsilon(eps, theta)
    part = Partition.scaled(p['lam'], eps)
    value = ((theta * _dimension(n, m) + n * (theta - 1)) * math.log(eps)
             + log_b_norm(part, qt) + _log_P_exp(eps, p, qt))
    limit = (-n * gammaln(theta) + (theta - 1) * sum(_log1mexp(x) for x in p['lam'])
             + ho_Phi(_hyper(p, quad), quad).log_value)
    return value, float(limit)


def _mac_qeval_lim(eps, p, quad):
    n, m, theta, lam = p['n'], p['m'], p['theta'], p['lam']
    qt = QParams.from_epsilon(eps, theta)
    part = Partition.scaled(lam, eps)
    value = ((theta * _dimension(n, m) + n * (theta - 1)) * math.log(eps)
             + log_b_norm(part, qt) + log_principal_eval(part, m, qt))
    limit = (-sum(gammaln(k * theta) for k in range(m - n + 1, m + 1)) + theta * _log_delta_exp(lam)
             + (theta * (m - n + 1) - 1) * sum(_log1mexp(x) for x in lam))
    return value, float(limit)


def _mac_ho_scale(eps, p, quad):
    n, m, theta = p['n'], p['m'], p['theta']
    qt = QParams.from_epsilon(eps, theta)
    value = _log_P_exp(eps, p, qt) - log_principal_eval(Partition.scaled(p['lam'], eps), m, qt)
    limit = 0.5 * (n - 1) * theta * sum(p['lam']) + ho_F(_hyper(p, quad), quad).log_value
    return value, float(limit)


def _ho_mvb_scale(eps, p, quad):
    n, m, theta = p['n'], p['m'], p['theta']
    scaled = HyperParams(n, m, theta, [eps * x for x in p['lam']], [s / eps for s in p['s']])
    return ho_F(scaled, quad).log_value, bessel_B(_hyper(p, quad), quad).log_value


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitCheck:
    """One ε → 0 limit with its default parameters and acceptance tolerance."""

    check_id: str
    description: str
    evaluate: Callable[[float, Dict[str, Any], QuadSpec], Tuple[float, float]]
    params: Dict[str, Any]
    eps: Tuple[float, ...]
    tolerance: float
    scalar: bool = True


@dataclass
class LimitTrajectory:
    """Per-ε relative errors of a limit check."""

    check_id: str
    eps: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    limit: float = math.nan
    errors: List[float] = field(default_factory=list)

    @property
    def final_error(self) -> float:
        return self.errors[-1] if self.errors else math.inf

    @property
    def monotone(self) -> bool:
        return all(b <= a or b < NOISE_FLOOR for a, b in zip(self.errors, self.errors[1:]))

    def to_rows(self) -> List[Dict[str, float]]:
        return [{'eps': e, 'value': v, 'limit': self.limit, 'rel_error': r}
                for e, v, r in zip(self.eps, self.values, self.errors)]


_MAC_CASE = {'theta': 0.5, 'n': 1, 'm': 2, 'lam': (1.0,), 's': (0.3, -0.5)}
_MAC_CASE_N2 = {'theta': 2.0, 'n': 2, 'm': 2, 'lam': (1.0, 0.4), 's': (0.3, -0.5)}

LIMIT_CHECKS: Dict[str, LimitCheck] = {c.check_id: c for c in (
    LimitCheck("qpoch-asymp", "(q^a u; q)/(q^b u; q) → (1-u)^{b-a}", _qpoch_asymp,
               {'a': 0.3, 'b': 0.7, 'u': 0.5}, SCALAR_EPS, 1e-4),
    LimitCheck("fin-qpoch-asymp", "finite q-Pochhammer ratio with q^{m(q)} → e^m", _fin_qpoch_asymp,
               {'a': 0.3, 'b': 0.7, 'u': 0.5, 'm': -1.0}, SCALAR_EPS, 1e-4),
    LimitCheck("qgamma", "(1-q)^{1-x} (q; q)/(q^x; q) → Γ(x)", _qgamma,
               {'x': 1.5}, SCALAR_EPS, 1e-3),
    LimitCheck("ratio-qpoch", "(q^a; q)/(q^b; q) (1-q)^{a-b} → Γ(b)/Γ(a)", _ratio_qpoch,
               {'a': 1.25, 'b': 1.75}, SCALAR_EPS, 1e-4),
    LimitCheck("gamma-rat", "ε^{-θ} Γ(a/ε)/Γ(a/ε + θ) → a^{-θ}", _gamma_rat,
               {'a': 2.0, 'theta': 0.5}, SCALAR_EPS, 1e-4),
    LimitCheck("f-lim-a", "f(u q^a) → (1-u)^{1-θ}", _f_lim_a,
               {'a': -0.25, 'u': 0.5, 'theta': 0.5}, SCALAR_EPS, 1e-4),
    LimitCheck("f-lim-b", "ε^{θ-1} f(q^a) → Γ(1+a)/Γ(θ+a)", _f_lim_b,
               {'a': 0.5, 'theta': 0.5}, SCALAR_EPS, 1e-4),
    LimitCheck("mac-eval-lim", "scaled principal evaluation of P_λ", _mac_eval_lim,
               {'n': 1, 'm': 2, 'theta': 0.5, 'lam': (1.0,)}, MACDONALD_EPS, 1e-2, False),
    LimitCheck("mac-branch-lim", "scaled branching coefficient, ℓ(λ) = m", _mac_branch_lim,
               {'m': 2, 'theta': 0.5, 'lam': (1.0, 0.4), 'mu': (0.7,)}, MACDONALD_EPS, 1e-2, False),
    LimitCheck("mac-tbranch-lim", "scaled truncated branching coefficient, ℓ(λ) < m", _mac_tbranch_lim,
               {'n': 1, 'm': 2, 'theta': 0.5, 'lam': (1.0,), 'mu': (0.4,)}, MACDONALD_EPS, 1e-2, False),
    LimitCheck("b-ho-scaling", "scaled Macdonald norm b_λ", _b_ho_scaling,
               {'n': 2, 'theta': 0.5, 'lam': (1.0, 0.4)}, MACDONALD_EPS, 1e-2, False),
    LimitCheck("mac-lim", "scaled P_λ(e^{εs}) → Φ(λ, s)", _mac_lim,
               dict(_MAC_CASE), MACDONALD_EPS, 1e-2, False),
    LimitCheck("mac-q-lim", "scaled Q_λ(e^{εs}) → Γ(θ)^{-n} ∏(1-e^{-λ})^{θ-1} Φ(λ, s)", _mac_q_lim,
               dict(_MAC_CASE), MACDONALD_EPS, 1e-2, False),
    LimitCheck("mac-qeval-lim", "scaled principal evaluation of Q_λ", _mac_qeval_lim,
               {'n': 1, 'm': 2, 'theta': 0.5, 'lam': (1.0,)}, MACDONALD_EPS, 1e-2, False),
    LimitCheck("mac-ho-scale", "P_λ(e^{εs}) / P_λ(1, t, ...) → e^{(n-1)θ|λ|/2} F(λ, s)", _mac_ho_scale,
               dict(_MAC_CASE_N2), MACDONALD_EPS, 1e-2, False),
    LimitCheck("ho-mvb-scale", "F(ελ, s/ε) → B(λ, s)", _ho_mvb_scale,
               {'n': 1, 'm': 2, 'theta': 0.5, 'lam': (1.0,), 's': (0.3, -0.5)}, MACDONALD_EPS, 1e-2, False),
)}


def get_check(check_id: str) -> LimitCheck:
    try:
        return LIMIT_CHECKS[check_id]
    except KeyError:
        raise ParameterError(f"Unknown limit check: {check_id}") from None


def run_limit(check_id: str, eps: Optional[Sequence[float]] = None,
              params: Optional[Dict[str, Any]] = None,
              quad: Optional[QuadSpec] = None) -> LimitTrajectory:
    """
    Evaluate a limit check along a decreasing ε-sequence.

    Args:
        check_id: Registry id
        eps: ε values (defaults to the check's sequence); at least 3, strictly decreasing
        params: Overrides of the check's default parameters
        quad: Quadrature settings for checks whose limit is a special function

    Returns:
        LimitTrajectory with one relative error per ε
    """
    check = get_check(check_id)
    eps = tuple(float(e) for e in (eps if eps is not None else check.eps))
    if len(eps) < 3:
        raise ParameterError("An ε-sequence needs at least 3 points")
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ParameterError(f"ε-sequence must be positive and strictly decreasing: {eps}")
    merged = {**check.params, **(params or {})}
    quad = quad or QuadSpec()

    traj = LimitTrajectory(check_id, list(eps))
    for e in eps:
        log_value, log_limit = check.evaluate(e, merged, quad)
        traj.values.append(math.exp(log_value))
        traj.limit = math.exp(log_limit)
        traj.errors.append(abs(math.expm1(log_value - log_limit)))
        logger.debug(f"{check_id}: eps={e:g} rel_error={traj.errors[-1]:.3e}")
    return traj
