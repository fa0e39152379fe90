"""
Dense Linear Algebra and Random Matrices

Gaussian matrices with entrywise variances, Haar orthogonal/unitary matrices,
self-adjoint eigenvalues and the generalized pencil used by the Jacobi model.
"""

import logging
from typing import Callable, Tuple, Union

import numpy as np
import scipy.linalg

from models.matrices import DenseMatrix, Field, SelfAdjointMatrix
from models.spectra import Spectrum
from utils.errors import ParameterError, ValidationError

logger = logging.getLogger(__name__)

PSD_CLAMP = 1e-12

VarianceSpec = Union[float, np.ndarray, Callable[[int, int], float]]


def _variance_array(rows: int, cols: int, variance_of: VarianceSpec) -> np.ndarray:
    if callable(variance_of):
        var = np.array([[variance_of(i, j) for j in range(1, cols + 1)]
                        for i in range(1, rows + 1)], dtype=float)
    else:
        var = np.broadcast_to(np.asarray(variance_of, dtype=float), (rows, cols))
    if not np.all(np.isfinite(var)) or np.any(var <= 0):
        raise ParameterError("Entry variances must be positive and finite")
    return var


def gaussian_entries(shape: Tuple[int, ...], beta: int, rng: np.random.Generator) -> np.ndarray:
    """Standard entries: real N(0,1) for β=1, complex with E|z|²=1 for β=2."""
    if beta == 1:
        return rng.standard_normal(shape)
    if beta == 2:
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    raise ParameterError(f"beta must be 1 or 2, got {beta}")


def sample_gaussian_matrix(rows: int, cols: int, variance_of: VarianceSpec,
                           field: Union[Field, int], rng: np.random.Generator) -> DenseMatrix:
    """
    Independent zero-mean Gaussian entries with E|a_ij|² = variance_of(i, j).

    Args:
        rows: Row count
        cols: Column count
        variance_of: Scalar, (rows, cols) array or callable of 1-based (i, j)
        field: Field tag or β
        rng: Random generator

    Returns:
        DenseMatrix of the requested field
    """
    if rows < 1 or cols < 1:
        raise ParameterError(f"Matrix dimensions must be positive, got {rows}x{cols}")
    field = field if isinstance(field, Field) else Field.from_beta(field)
    var = _variance_array(rows, cols, variance_of)
    return DenseMatrix(np.sqrt(var) * gaussian_entries((rows, cols), field.beta, rng), field)


def clamp_psd(values: np.ndarray, scale: float) -> np.ndarray:
    """Zero out roundoff negatives of a PSD spectrum; reject genuinely negative ones."""
    floor = -PSD_CLAMP * max(1.0, scale)
    if np.any(values < floor):
        raise ValidationError(f"Gram spectrum has negative eigenvalue {values.min():.3e}")
    return np.where(values < 0, 0.0, values)


def eig_self_adjoint(M: SelfAdjointMatrix, vectors: bool = False):
    """
    Eigenvalues of a self-adjoint matrix in decreasing order.

    Args:
        M: Self-adjoint matrix
        vectors: Also return the eigenvector matrix (columns match the order)

    Returns:
        Spectrum, or (Spectrum, Q) when ``vectors`` is set
    """
    if not isinstance(M, SelfAdjointMatrix):
        raise ValidationError("eig_self_adjoint needs a SelfAdjointMatrix")
    a = M.entries
    if vectors:
        w, q = np.linalg.eigh(a)
        order = np.argsort(w)[::-1]
        return Spectrum.of(w[order]), q[:, order]
    return Spectrum.of(np.linalg.eigvalsh(a)[::-1])


def gram_spectrum(A: DenseMatrix) -> Spectrum:
    """The min(rows, cols) leading eigenvalues of A*A, from the smaller Gram matrix."""
    a = A.entries
    g = a @ a.conj().T if A.rows < A.cols else a.conj().T @ a
    w = np.linalg.eigvalsh(g)[::-1]
    scale = float(w[0]) if w.size else 1.0
    return Spectrum.of(clamp_psd(w, scale))


def gram_spectra_batch(a: np.ndarray) -> np.ndarray:
    """Decreasing Gram spectra for a stack of (count, rows, cols) matrices."""
    rows, cols = a.shape[-2:]
    if rows < cols:
        g = a @ np.conj(np.swapaxes(a, -1, -2))
    else:
        g = np.conj(np.swapaxes(a, -1, -2)) @ a
    w = np.linalg.eigvalsh(g)[..., ::-1]
    scale = float(np.max(w)) if w.size else 1.0
    return clamp_psd(w, scale)


def sample_haar_batch(dim: int, group: str, count: int, rng: np.random.Generator) -> np.ndarray:
    """
    Haar-distributed orthogonal or unitary matrices, shape (count, dim, dim).

    QR of a Ginibre matrix with the diagonal of R normalized to have positive
    (real) entries.
    """
    if dim < 1:
        raise ParameterError(f"Haar dimension must be positive, got {dim}")
    if group not in ("orthogonal", "unitary"):
        raise ParameterError(f"group must be 'orthogonal' or 'unitary', got {group}")
    beta = 1 if group == "orthogonal" else 2
    z = gaussian_entries((count, dim, dim), beta, rng)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    phase = d / np.abs(d)
    return q * phase[:, None, :]


def sample_haar(dim: int, group: str, rng: np.random.Generator) -> DenseMatrix:
    """Single Haar orthogonal (β=1) or unitary (β=2) matrix."""
    u = sample_haar_batch(dim, group, 1, rng)[0]
    return DenseMatrix(u, Field.REAL if group == "orthogonal" else Field.COMPLEX)


def pencil_eigenvalues(P: np.ndarray, R: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Eigenvalues of P v = λ (P + R) v in increasing order, with cond(P + R).

    Both P and R are positive semidefinite and P + R is positive definite, so all
    eigenvalues lie in [0, 1].
    """
    S = P + R
    cond = float(np.linalg.cond(S))
    w = scipy.linalg.eigh(P, S, eigvals_only=True)
    return np.clip(w, 0.0, 1.0), cond


def pencil_eigenvalues_batch(P: np.ndarray, R: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Batched pencil eigenvalues via a Cholesky reduction; increasing order."""
    S = P + R
    cond = np.linalg.cond(S)
    L = np.linalg.cholesky(S)
    C = np.linalg.solve(L, P)
    K = np.linalg.solve(L, np.conj(np.swapaxes(C, -1, -2)))
    K = 0.5 * (K + np.conj(np.swapaxes(K, -1, -2)))
    return np.clip(np.linalg.eigvalsh(K), 0.0, 1.0), cond
