"""
Matrix Data Models

Dense and self-adjoint matrix containers carrying their field tag (real for β=1,
complex for β=2).
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from utils.errors import ParameterError, ValidationError

SELF_ADJOINT_RTOL = 1e-12


class Field(Enum):
    """Scalar field of a matrix model."""
    REAL = 1
    COMPLEX = 2

    @classmethod
    def from_beta(cls, beta: int) -> "Field":
        if beta == 1:
            return cls.REAL
        if beta == 2:
            return cls.COMPLEX
        raise ParameterError(f"beta must be 1 or 2, got {beta}")

    @property
    def beta(self) -> int:
        return self.value

    @property
    def dtype(self):
        return np.float64 if self is Field.REAL else np.complex128


@dataclass
class DenseMatrix:
    """Rectangular matrix with a consistent field tag."""

    entries: np.ndarray
    field: Field

    def __post_init__(self):
        self.entries = np.asarray(self.entries)
        if self.entries.ndim != 2:
            raise ValidationError(f"DenseMatrix needs a 2-D array, got shape {self.entries.shape}")
        if self.field is Field.REAL and np.iscomplexobj(self.entries):
            if np.any(self.entries.imag != 0):
                raise ValidationError("Real matrix has complex entries")
            self.entries = self.entries.real
        self.entries = self.entries.astype(self.field.dtype, copy=False)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def adjoint(self) -> "DenseMatrix":
        return DenseMatrix(self.entries.conj().T, self.field)

    def top_rows(self, m: int) -> "DenseMatrix":
        return DenseMatrix(self.entries[:m], self.field)

    def gram(self) -> "SelfAdjointMatrix":
        """A* A as a self-adjoint matrix."""
        a = self.entries
        return SelfAdjointMatrix(DenseMatrix(a.conj().T @ a, self.field))


@dataclass
class SelfAdjointMatrix:
    """Square matrix equal to its adjoint within a relative tolerance."""

    matrix: DenseMatrix

    def __post_init__(self):
        a = self.matrix.entries
        if a.shape[0] != a.shape[1]:
            raise ValidationError(f"Self-adjoint matrix must be square, got {a.shape}")
        scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
        asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
        if asym > SELF_ADJOINT_RTOL * scale:
            raise ValidationError(f"Matrix is not self-adjoint (asymmetry {asym:.3e})")

    @classmethod
    def from_array(cls, entries, beta: int = 1) -> "SelfAdjointMatrix":
        return cls(DenseMatrix(np.asarray(entries), Field.from_beta(beta)))

    @property
    def dim(self) -> int:
        return self.matrix.rows

    @property
    def entries(self) -> np.ndarray:
        return self.matrix.entries
