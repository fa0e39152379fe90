"""
Run Configuration

One validated record per CLI command, merged from command-line flags, a structured
run configuration file, the environment (through Config) and built-in defaults,
in that order of precedence.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

from models.params import JacobiParams, QuadScheme, QuadSpec, WishartParams
from utils.errors import ConfigError, ParameterError

COMMANDS = ('sample', 'density', 'verify', 'cauchy', 'limits')
MODELS = ('wishart', 'jacobi')

# file section -> keys it may hold
_FILE_KEYS = {
    'model': ('model', 'beta', 'pi', 'pi_hat', 'A', 'n', 'levels', 'theta', 's', 'r'),
    'quadrature': ('scheme', 'order', 'tolerance', 'samples', 'node_budget'),
    'output': ('out', 'format'),
    'run': ('count', 'seed', 'workers', 'suite', 'density_id', 'identity', 'check_id', 'eps'),
}


def _tuple(value) -> Tuple[float, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return tuple(float(v) for v in value.split(",") if v.strip())
    return tuple(float(v) for v in value)


@dataclass
class RunConfig:
    """Everything one command needs."""

    command: str
    model: str = "wishart"
    beta: int = 2
    pi: Tuple[float, ...] = ()
    pi_hat: Tuple[float, ...] = ()
    A: Optional[int] = None
    n: Optional[int] = None
    levels: Optional[int] = None
    theta: Optional[float] = None
    s: Tuple[float, ...] = ()
    r: Tuple[float, ...] = ()
    count: int = 1000
    seed: int = 0
    workers: int = 1
    suite: str = "quick"
    density_id: Optional[str] = None
    identity: Optional[str] = None
    check_id: Optional[str] = None
    eps: Tuple[float, ...] = ()
    quad: QuadSpec = field(default_factory=QuadSpec)
    out: Optional[str] = None
    format: str = "csv"

    @classmethod
    def merge(cls, command: str, flags: Dict[str, Any], file_data: Optional[Dict[str, Any]], config) -> "RunConfig":
        """
        Combine sources: flag > file > environment > default.

        Args:
            command: Subcommand name
            flags: Parsed flags; None means "not given"
            file_data: Sectioned run configuration (may be None)
            config: Config carrying environment defaults

        Returns:
            Validated RunConfig
        """
        if command not in COMMANDS:
            raise ConfigError(f"Unknown command: {command}")
        values: Dict[str, Any] = {
            'seed': config.SEED, 'workers': config.WORKERS, 'format': config.OUTPUT_FORMAT,
            'order': config.QUAD_ORDER, 'tolerance': config.QUAD_TOL, 'samples': config.MC_SAMPLES,
            'node_budget': config.NODE_BUDGET,
        }
        for section, keys in _FILE_KEYS.items():
            block = (file_data or {}).get(section) or {}
            unknown = sorted(set(block) - set(keys))
            if unknown:
                raise ConfigError(f"Unknown keys in section '{section}': {', '.join(unknown)}")
            values.update(block)
        values.update({k: v for k, v in flags.items() if v is not None})

        try:
            quad = QuadSpec(scheme=QuadScheme(values.pop('scheme', QuadScheme.DOUBLE_EXPONENTIAL.value)),
                            order=int(values.pop('order')), tolerance=float(values.pop('tolerance')),
                            samples=int(values.pop('samples')), seed=int(values['seed']),
                            node_budget=int(values.pop('node_budget')))
        except ValueError as e:
            raise ConfigError(f"Invalid quadrature settings: {e}") from e

        known = {f for f in cls.__dataclass_fields__} - {'command', 'quad'}
        kwargs = {k: v for k, v in values.items() if k in known}
        for key in ('pi', 'pi_hat', 's', 'r', 'eps'):
            if key in kwargs:
                kwargs[key] = _tuple(kwargs[key])
        run = cls(command=command, quad=quad, **kwargs)
        run.validate()
        return run

    def validate(self) -> None:
        """Check the command's preconditions; collects every problem into one ConfigError."""
        errors = []
        if self.seed < 0:
            errors.append("seed must be a nonnegative integer")
        if self.workers < 1:
            errors.append("workers must be at least 1")
        if self.format not in ('csv', 'json'):
            errors.append("format must be csv or json")
        if self.command in ('sample', 'density'):
            if self.model not in MODELS:
                errors.append(f"model must be one of {', '.join(MODELS)}")
            if self.beta not in (1, 2):
                errors.append("beta must be 1 or 2")
            if self.command == 'sample' and self.count < 0:
                errors.append("count must be nonnegative")
            if self.model == 'wishart' and self.command == 'sample' and not self.levels:
                errors.append("wishart sampling needs --levels")
        if self.command == 'cauchy' and (self.n is None or self.levels is None or self.theta is None):
            errors.append("cauchy needs --n, --m and --theta")
        if errors:
            raise ConfigError("Configuration validation failed:\n" + "\n".join(f"- {e}" for e in errors))

    def model_params(self) -> Union[WishartParams, JacobiParams]:
        """Model parameters; invalid values raise ParameterError."""
        if self.model == 'wishart':
            return WishartParams(self.beta, self.pi, self.pi_hat)
        if self.A is None or self.n is None or self.levels is None:
            raise ParameterError("jacobi needs --A, --n and --levels")
        return JacobiParams(self.beta, int(self.A), int(self.n), int(self.levels))

    def params_dict(self) -> Dict[str, Any]:
        """Parameters recorded in output headers."""
        out = {k: v for k, v in asdict(self).items() if k not in ('quad', 'out', 'format', 'seed')}
        out['quad'] = {'scheme': self.quad.scheme.value, 'order': self.quad.order,
                       'tolerance': self.quad.tolerance, 'samples': self.quad.samples}
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in out.items() if v not in (None, ())}
