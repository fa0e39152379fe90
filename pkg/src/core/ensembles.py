"""
Multilevel Matrix Ensembles

Samplers for the generalized β-Wishart corners process (Gram matrices of the top
rows of one Gaussian matrix with variances 1/(π_j + π̂_i)) and the β-Jacobi corners
process (the m smallest eigenvalues of the pencil X*X v = λ (X*X + Y_m*Y_m) v).
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from core.linalg import (clamp_psd, gaussian_entries, gram_spectra_batch, gram_spectrum,
                         pencil_eigenvalues, pencil_eigenvalues_batch, sample_gaussian_matrix)
from models.matrices import DenseMatrix, Field
from models.params import JacobiParams, WishartParams, check_beta
from models.spectra import MultilevelSample, Spectrum
from utils.errors import ParameterError, SamplingError
from utils.logger import LoggerMixin, log_function_call
from utils.seeding import run_draws

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e14
MAX_RESAMPLES = 10
INTERLACE_TOL = 1e-9


def _check_interlacing(sample: MultilevelSample) -> MultilevelSample:
    scale = max((lvl.values[0] for lvl in sample.levels if lvl.values), default=1.0)
    if not sample.check_interlacing(tol=INTERLACE_TOL * max(1.0, scale)):
        raise SamplingError("Sampled levels do not interlace")
    return sample


def sample_wishart_multilevel(p: WishartParams, m_max: int, rng: np.random.Generator) -> MultilevelSample:
    """
    Eigenvalues of M_m = A_m* A_m for m = 1..m_max from a single Gaussian matrix.

    Args:
        p: Wishart parameters (π columns, π̂ rows)
        m_max: Number of levels
        rng: Random generator

    Returns:
        MultilevelSample with level m of length min(m, n)
    """
    if m_max < 1:
        raise ParameterError(f"m_max must be positive, got {m_max}")
    A = sample_gaussian_matrix(m_max, p.n, p.variance_matrix(m_max), p.beta, rng)
    levels = [gram_spectrum(A.top_rows(m)) for m in range(1, m_max + 1)]
    return _check_interlacing(MultilevelSample(levels, p.n, model="wishart"))


def sample_wishart_two_stage(p: WishartParams, m_max: int, rng: np.random.Generator) -> MultilevelSample:
    """Same law as sample_wishart_multilevel, through rank-one updates M_m = M_{m-1} + a_m* a_m."""
    n = p.n
    var = p.variance_matrix(m_max)
    M = np.zeros((n, n), dtype=Field.from_beta(p.beta).dtype)
    levels = []
    for m in range(1, m_max + 1):
        row = np.sqrt(var[m - 1]) * gaussian_entries((n,), p.beta, rng)
        M = M + np.outer(row.conj(), row)
        w = np.linalg.eigvalsh(M)[::-1]
        w = clamp_psd(w, float(w[0]))
        levels.append(Spectrum.of(w[:min(m, n)]))
    return _check_interlacing(MultilevelSample(levels, n, model="wishart"))


def sample_wishart_batch(p: WishartParams, m_max: int, count: int,
                         rng: np.random.Generator) -> List[np.ndarray]:
    """
    Vectorized multilevel draws.

    Returns:
        levels[m-1] of shape (count, min(m, n)), rows decreasing
    """
    n = p.n
    A = np.sqrt(p.variance_matrix(m_max))[None] * gaussian_entries((count, m_max, n), p.beta, rng)
    return [gram_spectra_batch(A[:, :m, :])[:, :min(m, n)] for m in range(1, m_max + 1)]


def expected_trace(p: WishartParams, m: int) -> float:
    """E tr M_m = Σ_{i ≤ m} Σ_j 1/(π_j + π̂_i), for either β."""
    return float(p.variance_matrix(m).sum())


def jacobi_full_spectrum(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """All n eigenvalues of J = X*X (X*X + Y*Y)^{-1}, increasing."""
    P = X.conj().T @ X
    R = Y.conj().T @ Y
    w, _ = pencil_eigenvalues(P, R)
    return w


def _draw_jacobi_matrices(p: JacobiParams, rng: np.random.Generator):
    X = gaussian_entries((p.A, p.n), p.beta, rng)
    Y = gaussian_entries((p.m_max, p.n), p.beta, rng)
    return X, Y


def sample_jacobi_multilevel(p: JacobiParams, rng: np.random.Generator) -> MultilevelSample:
    """
    The m smallest eigenvalues of J_m for m = 1..m_max, one (X, Y) realization.

    Draws whose pencil P + R has condition number above 1e14 are redrawn.
    """
    for attempt in range(MAX_RESAMPLES):
        X, Y = _draw_jacobi_matrices(p, rng)
        P = X.conj().T @ X
        levels = []
        singular = False
        for m in range(1, p.m_max + 1):
            Ym = Y[:m]
            w, cond = pencil_eigenvalues(P, Ym.conj().T @ Ym)
            if cond > MAX_CONDITION:
                singular = True
                break
            levels.append(Spectrum.of(w[:m]))
        if not singular:
            sample = MultilevelSample(levels, p.n, model="jacobi")
            return _check_interlacing(sample)
        logger.warning(f"Ill-conditioned Jacobi pencil (attempt {attempt + 1}), resampling")
    raise SamplingError(f"No well-conditioned Jacobi draw after {MAX_RESAMPLES} attempts")


def sample_jacobi_batch(p: JacobiParams, count: int, rng: np.random.Generator) -> List[np.ndarray]:
    """Vectorized Jacobi draws; levels[m-1] has shape (count, m), rows decreasing."""
    X = gaussian_entries((count, p.A, p.n), p.beta, rng)
    Y = gaussian_entries((count, p.m_max, p.n), p.beta, rng)
    for attempt in range(MAX_RESAMPLES + 1):
        P = np.conj(np.swapaxes(X, -1, -2)) @ X
        levels, bad = [], np.zeros(count, dtype=bool)
        for m in range(1, p.m_max + 1):
            Ym = Y[:, :m, :]
            w, cond = pencil_eigenvalues_batch(P, np.conj(np.swapaxes(Ym, -1, -2)) @ Ym)
            bad |= cond > MAX_CONDITION
            levels.append(w[:, :m][:, ::-1])
        if not bad.any():
            return levels
        if attempt == MAX_RESAMPLES:
            break
        k = int(bad.sum())
        logger.warning(f"Resampling {k} ill-conditioned Jacobi draws")
        X[bad] = gaussian_entries((k, p.A, p.n), p.beta, rng)
        Y[bad] = gaussian_entries((k, p.m_max, p.n), p.beta, rng)
    raise SamplingError(f"No well-conditioned Jacobi batch after {MAX_RESAMPLES} attempts")


def sample_jacobi_conditional(lam_x: Sequence[float], n: int, m_max: int, beta: int,
                              rng: np.random.Generator) -> MultilevelSample:
    """
    Jacobi levels given the spectrum λ_X of X*X.

    τ = 1/λ - 1 is a generalized Wishart process with π = λ_X and π̂ = 0; the
    returned levels are λ = 1/(1 + τ).
    """
    check_beta(beta)
    lam_x = tuple(float(v) for v in lam_x)
    if len(lam_x) != n:
        raise ParameterError(f"λ_X must have n={n} entries, got {len(lam_x)}")
    if any(v <= 0 for v in lam_x):
        raise ParameterError("λ_X entries must be strictly positive")
    if not 1 <= m_max <= n:
        raise ParameterError(f"Need 1 <= m_max <= n, got m_max={m_max}, n={n}")
    tau = sample_wishart_multilevel(WishartParams(beta, lam_x), m_max, rng)
    levels = [Spectrum.of(1.0 / (1.0 + lvl.as_array())) for lvl in tau.levels]
    return MultilevelSample(levels, n, model="jacobi", metadata={"lambda_x": lam_x})


def sample_jacobi_two_stage(p: JacobiParams, rng: np.random.Generator) -> MultilevelSample:
    """Draw X, take λ_X = eig(X*X), then sample the conditional Wishart route."""
    X = DenseMatrix(gaussian_entries((p.A, p.n), p.beta, rng), Field.from_beta(p.beta))
    lam_x = gram_spectrum(X).values
    return sample_jacobi_conditional(lam_x, p.n, p.m_max, p.beta, rng)


ModelParams = Union[WishartParams, JacobiParams]


@dataclass(frozen=True)
class _Job:
    params: ModelParams
    m_max: int


def _draw(job: _Job, rng: np.random.Generator) -> MultilevelSample:
    if isinstance(job.params, WishartParams):
        return sample_wishart_multilevel(job.params, job.m_max, rng)
    return sample_jacobi_multilevel(job.params, rng)


class SampleBatch(LoggerMixin):
    """Runs many independent multilevel draws with per-draw substreams."""

    def __init__(self, config=None):
        self.config = config

    @log_function_call
    def run(self, params: ModelParams, count: int, seed: Optional[int] = None,
            workers: Optional[int] = None, m_max: Optional[int] = None) -> List[MultilevelSample]:
        """
        Draw ``count`` samples; draw i uses the substream (seed, i).

        Args:
            params: WishartParams or JacobiParams
            count: Number of draws
            seed: Run seed (defaults to the configured seed)
            workers: Process count (defaults to the configured worker count)
            m_max: Number of Wishart levels (Jacobi uses params.m_max)

        Returns:
            Samples in draw order, each tagged with its seed and draw index
        """
        seed = seed if seed is not None else (self.config.SEED if self.config else 0)
        workers = workers if workers is not None else (self.config.WORKERS if self.config else 1)
        if isinstance(params, WishartParams):
            if m_max is None:
                raise ParameterError("Wishart sampling needs the number of levels")
        else:
            m_max = params.m_max
        if count < 0:
            raise ParameterError(f"Sample count must be nonnegative, got {count}")

        self.logger.info(f"Sampling {count} draws ({type(params).__name__}, m={m_max}, "
                         f"seed={seed}, workers={workers})")
        samples = run_draws(_draw, _Job(params, m_max), count, seed, workers)
        for index, sample in enumerate(samples):
            sample.seed = seed
            sample.draw_index = index
        return samples
