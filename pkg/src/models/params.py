"""
Parameter Models

Model parameters for the Wishart and Jacobi ensembles, (q, t) pairs for Macdonald
polynomials, special-function arguments and quadrature settings.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from utils.errors import ParameterError


def _floats(values: Sequence[float]) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)


def check_beta(beta: int) -> int:
    if beta not in (1, 2):
        raise ParameterError(f"beta must be 1 or 2, got {beta}")
    return int(beta)


@dataclass(frozen=True)
class QParams:
    """Macdonald parameters with t = q^θ."""

    q: float
    t: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ParameterError(f"q must lie in (0, 1), got {self.q}")
        if not 0.0 < self.t < 1.0:
            raise ParameterError(f"t must lie in (0, 1), got {self.t}")

    @classmethod
    def from_theta(cls, q: float, theta: float) -> "QParams":
        return cls(q, q ** theta)

    @classmethod
    def from_epsilon(cls, eps: float, theta: float) -> "QParams":
        """q = e^{-ε}, t = e^{-θε}."""
        return cls(math.exp(-eps), math.exp(-theta * eps))

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    @property
    def theta(self) -> float:
        return math.log(self.t) / math.log(self.q)


class QuadScheme(Enum):
    """Integration scheme over a Gelfand-Tsetlin polytope."""
    DOUBLE_EXPONENTIAL = "double-exponential"
    TENSOR_GAUSS = "tensor-gauss"
    MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature settings."""

    scheme: QuadScheme = QuadScheme.DOUBLE_EXPONENTIAL
    order: int = 40
    tolerance: float = 1e-8
    samples: int = 100_000
    seed: int = 0
    node_budget: int = 2_000_000
    t_max: float = 3.1
    strict: bool = False

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ParameterError("Quadrature tolerance must be positive")
        if self.order < 2:
            raise ParameterError("Quadrature order must be at least 2")
        if self.samples < 1:
            raise ParameterError("Monte Carlo sample count must be positive")

    @classmethod
    def from_config(cls, config, scheme: QuadScheme = QuadScheme.DOUBLE_EXPONENTIAL) -> "QuadSpec":
        return cls(scheme=scheme, order=config.QUAD_ORDER, tolerance=config.QUAD_TOL,
                   samples=config.MC_SAMPLES, seed=config.SEED, node_budget=config.NODE_BUDGET)

    def with_order(self, order: int) -> "QuadSpec":
        return QuadSpec(self.scheme, order, self.tolerance, self.samples, self.seed,
                        self.node_budget, self.t_max, self.strict)


@dataclass(frozen=True)
class HyperParams:
    """Arguments of B^{n,m}_β(λ, s) and F^{n,m}_β(λ, s)."""

    n: int
    m: int
    theta: float
    lam: Tuple[float, ...]
    s: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lam", _floats(self.lam))
        object.__setattr__(self, "s", _floats(self.s))
        if self.n < 0 or self.m < 1 or self.n > self.m:
            raise ParameterError(f"Need 0 <= n <= m and m >= 1, got n={self.n}, m={self.m}")
        if self.theta <= 0:
            raise ParameterError(f"theta must be positive, got {self.theta}")
        if len(self.lam) != self.n:
            raise ParameterError(f"lambda must have n={self.n} entries, got {len(self.lam)}")
        if len(self.s) != self.m:
            raise ParameterError(f"s must have m={self.m} entries, got {len(self.s)}")

    @property
    def dimension(self) -> int:
        """Dimension of the Gelfand-Tsetlin polytope."""
        return (self.m - self.n) * self.n + self.n * (self.n - 1) // 2


@dataclass(frozen=True)
class WishartParams:
    """
    Generalized β-Wishart parameters.

    Entry (i, j) of the Gaussian matrix (row i, 1-based, column j) has variance
    1/(π_j + π̂_i). ``pi_hat`` is zero-extended past its end.
    """

    beta: int
    pi: Tuple[float, ...]
    pi_hat: Tuple[float, ...] = ()

    def __post_init__(self):
        check_beta(self.beta)
        object.__setattr__(self, "pi", _floats(self.pi))
        object.__setattr__(self, "pi_hat", _floats(self.pi_hat))
        if not self.pi:
            raise ParameterError("pi must have at least one entry")
        if any(p <= 0 or not math.isfinite(p) for p in self.pi):
            raise ParameterError(f"pi entries must be positive and finite: {self.pi}")
        if any(p < 0 or not math.isfinite(p) for p in self.pi_hat):
            raise ParameterError(f"pi_hat entries must be nonnegative and finite: {self.pi_hat}")

    @property
    def theta(self) -> float:
        return self.beta / 2.0

    @property
    def n(self) -> int:
        return len(self.pi)

    def pi_hat_at(self, level: int) -> float:
        """π̂ for a 1-based level."""
        return self.pi_hat[level - 1] if level <= len(self.pi_hat) else 0.0

    def variance(self, i: int, j: int) -> float:
        """Variance of entry (i, j), both 1-based."""
        return 1.0 / (self.pi[j - 1] + self.pi_hat_at(i))

    def variance_matrix(self, rows: int) -> np.ndarray:
        pi = np.asarray(self.pi)
        pi_hat = np.array([self.pi_hat_at(i) for i in range(1, rows + 1)])
        return 1.0 / (pi_hat[:, None] + pi[None, :])


@dataclass(frozen=True)
class JacobiParams:
    """β-Jacobi parameters: X is A×n, Y^{m n} has m ≤ m_max ≤ n rows."""

    beta: int
    A: int
    n: int
    m_max: int

    def __post_init__(self):
        check_beta(self.beta)
        if not 1 <= self.m_max <= self.n <= self.A:
            raise ParameterError(f"Need 1 <= m <= n <= A, got m={self.m_max}, n={self.n}, A={self.A}")

    @property
    def theta(self) -> float:
        return self.beta / 2.0

    @property
    def principal_pi(self) -> Tuple[float, ...]:
        """π = (A−n+1, ..., A) in decreasing order."""
        return tuple(float(self.A - i) for i in range(self.n))

    def principal_pi_hat(self, m: Optional[int] = None) -> Tuple[float, ...]:
        """π̂ = (0, 1, ..., m−1)."""
        return tuple(float(i) for i in range(m if m is not None else self.m_max))
