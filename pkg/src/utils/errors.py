"""
Error Types

Exception hierarchy shared by the samplers, special-function evaluators and the CLI.
"""

from typing import Optional


class CornersLabError(Exception):
    """Base class for every error raised by corners-lab."""


class ParameterError(CornersLabError, ValueError):
    """Invalid model or numerical parameter."""


class ValidationError(CornersLabError, ValueError):
    """Malformed input data (non-self-adjoint matrix, unsorted level, ...)."""


class DegenerateInputError(ParameterError):
    """Repeated entries where a formula needs distinct values."""


class DimensionError(ParameterError):
    """Integration dimension beyond what the selected scheme supports."""


class ConfigError(CornersLabError, ValueError):
    """Invalid configuration, environment or threshold manifest."""


class QuadratureError(CornersLabError, RuntimeError):
    """Integrand produced NaN or the estimate did not reach its tolerance."""


class SamplingError(CornersLabError, RuntimeError):
    """A sampler could not produce a valid draw."""


class PointsParseError(ValidationError):
    """Parse failure in a points file, tagged with its 1-based line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.detail = message
        super().__init__(f"line {line}: {message}" if line is not None else message)
