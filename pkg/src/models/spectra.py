"""
Spectral Data Models

Spectra, partitions, Gelfand-Tsetlin patterns, multilevel samples and the log-domain
scalar used for every density and weight.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from utils.errors import ParameterError, ValidationError


def interlaces(lower: Sequence[float], upper: Sequence[float],
               strict: bool = False, tol: float = 0.0) -> bool:
    """
    Check ``lower ≺ upper`` for decreasing sequences.

    ``lower`` has length ``len(upper) - 1`` (growing levels) or ``len(upper)``
    (saturated levels, where the missing ``upper`` entry past the end is 0).
    """
    k = len(upper)
    if len(lower) not in (k, k - 1):
        return False
    for i, x in enumerate(lower):
        hi = upper[i]
        lo = upper[i + 1] if i + 1 < k else 0.0
        if strict:
            if not (hi > x > lo):
                return False
        elif not (hi + tol >= x >= lo - tol):
            return False
    return True


@dataclass(frozen=True)
class Spectrum:
    """Real eigenvalue tuple kept in weakly decreasing order."""

    values: Tuple[float, ...]

    def __post_init__(self):
        vals = tuple(sorted((float(v) for v in self.values), reverse=True))
        if any(math.isnan(v) for v in vals):
            raise ValidationError("Spectrum contains NaN")
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, values: Iterable[float]) -> "Spectrum":
        return cls(tuple(values))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    @property
    def length(self) -> int:
        return len(self.values)

    @property
    def total(self) -> float:
        """|λ|, the sum of entries."""
        return float(sum(self.values))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def is_strict(self) -> bool:
        return all(a > b for a, b in zip(self.values, self.values[1:]))

    def nonzero(self) -> "Spectrum":
        return Spectrum(tuple(v for v in self.values if v != 0.0))

    def padded(self, length: int) -> "Spectrum":
        if length < len(self.values):
            raise ParameterError(f"Cannot pad a spectrum of length {len(self.values)} to {length}")
        return Spectrum(self.values + (0.0,) * (length - len(self.values)))


@dataclass(frozen=True)
class LogValue:
    """Nonnegative real stored as its logarithm; ``-inf`` is the zero state."""

    log_magnitude: float

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(-math.inf)

    @classmethod
    def one(cls) -> "LogValue":
        return cls(0.0)

    @classmethod
    def from_value(cls, x: float) -> "LogValue":
        if x < 0:
            raise ParameterError(f"LogValue represents nonnegative numbers, got {x}")
        return cls(math.log(x)) if x > 0 else cls.zero()

    @classmethod
    def sum(cls, items: Iterable["LogValue"]) -> "LogValue":
        logs = [v.log_magnitude for v in items]
        if not logs:
            return cls.zero()
        return cls(float(logsumexp(logs)))

    @property
    def is_zero(self) -> bool:
        return self.log_magnitude == -math.inf

    @property
    def value(self) -> float:
        return math.exp(self.log_magnitude) if not self.is_zero else 0.0

    def __mul__(self, other: "LogValue") -> "LogValue":
        return LogValue(self.log_magnitude + other.log_magnitude)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.is_zero:
            raise ZeroDivisionError("division by the zero LogValue")
        return LogValue(self.log_magnitude - other.log_magnitude)

    def __pow__(self, exponent: float) -> "LogValue":
        if self.is_zero:
            if exponent > 0:
                return self
            if exponent == 0:
                return LogValue.one()
            raise ZeroDivisionError("negative power of the zero LogValue")
        return LogValue(self.log_magnitude * exponent)

    def __add__(self, other: "LogValue") -> "LogValue":
        return LogValue(float(np.logaddexp(self.log_magnitude, other.log_magnitude)))


@dataclass(frozen=True)
class Partition:
    """Integer partition with trailing zeros removed."""

    parts: Tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 0 for p in parts):
            raise ParameterError(f"Partition parts must be nonnegative: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ParameterError(f"Partition parts must be weakly decreasing: {parts}")
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        object.__setattr__(self, "parts", parts)

    @classmethod
    def scaled(cls, values: Sequence[float], eps: float) -> "Partition":
        """⌊values/ε⌋ as a partition."""
        return cls(tuple(int(math.floor(v / eps + 1e-9)) for v in values))

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def part(self, i: int) -> int:
        """0-based part with zero padding."""
        return self.parts[i] if i < len(self.parts) else 0

    def padded(self, length: int) -> Tuple[int, ...]:
        return tuple(self.part(i) for i in range(length))

    def conjugate(self) -> "Partition":
        if not self.parts:
            return Partition()
        return Partition(tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0])))


@dataclass
class GTPattern:
    """
    Batch of interlacing triangular arrays sharing one depth.

    ``levels[l-1]`` has shape (B, min(l, n)); the last level holds the top rows.
    """

    levels: List[np.ndarray]

    def __post_init__(self):
        if not self.levels:
            raise ValidationError("A GT pattern needs at least one level")
        self.levels = [np.atleast_2d(np.asarray(lvl, dtype=float)) for lvl in self.levels]
        if len({lvl.shape[0] for lvl in self.levels}) != 1:
            raise ValidationError("Every level of a GT pattern batch needs the same number of rows")
        n = self.n
        for l, lvl in enumerate(self.levels, start=1):
            if lvl.shape[1] != min(l, n):
                raise ValidationError(f"Level {l} has {lvl.shape[1]} entries, expected {min(l, n)}")

    @property
    def n(self) -> int:
        return self.levels[-1].shape[1]

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def size(self) -> int:
        return self.levels[0].shape[0]

    @property
    def top(self) -> np.ndarray:
        return self.levels[-1]

    def row(self, i: int) -> List[Tuple[float, ...]]:
        return [tuple(float(v) for v in lvl[i]) for lvl in self.levels]

    def valid_mask(self, tol: float = 0.0) -> np.ndarray:
        """Rows whose adjacent levels interlace within ``tol`` (0 below a saturated level)."""
        ok = np.ones(self.size, dtype=bool)
        for lo, up in zip(self.levels, self.levels[1:]):
            for i in range(lo.shape[1]):
                floor = up[:, i + 1] if i + 1 < up.shape[1] else 0.0
                ok &= (up[:, i] + tol >= lo[:, i]) & (lo[:, i] >= floor - tol)
        return ok

    def is_valid(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.valid_mask(tol)))


@dataclass
class MultilevelSample:
    """Eigenvalues of nested matrices μ^1 ≺ ... ≺ μ^m from one realization."""

    levels: List[Spectrum]
    n: int
    model: str = "wishart"
    seed: Optional[int] = None
    draw_index: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.levels = [lvl if isinstance(lvl, Spectrum) else Spectrum.of(lvl) for lvl in self.levels]
        for l, level in enumerate(self.levels, start=1):
            if len(level) != min(l, self.n):
                raise ValidationError(f"Level {l} has {len(level)} entries, expected {min(l, self.n)}")

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, l: int) -> Spectrum:
        """1-based level access; level 0 is the empty spectrum."""
        return self.levels[l - 1] if l > 0 else Spectrum(())

    def check_interlacing(self, tol: float = 0.0) -> bool:
        return all(interlaces(lo.values, up.values, tol=tol)
                   for lo, up in zip(self.levels, self.levels[1:]))

    def in_support(self, upper: Optional[float] = None, tol: float = 0.0) -> bool:
        for level in self.levels:
            if level.values and level.values[-1] < -tol:
                return False
            if upper is not None and level.values and level.values[0] > upper + tol:
                return False
        return True

    def to_rows(self) -> List[Dict[str, Any]]:
        """One row per level: draw index, level, eigenvalues."""
        return [{'draw': self.draw_index, 'level': l, 'values': level.values}
                for l, level in enumerate(self.levels, start=1)]
