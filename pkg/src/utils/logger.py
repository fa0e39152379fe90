"""
Logging Utilities

Console and rotating-file logging for corners-lab runs, plus helpers that time
expensive numerical entry points and record failures with context.
"""

import functools
import logging
import logging.handlers
import platform
import sys
import time
import traceback
from importlib import metadata
from pathlib import Path
from typing import Optional

APP_LOGGER_NAME = "corners_lab"
LOG_FILE_NAME = "corners_lab.log"

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

KEY_PACKAGES = ('numpy', 'scipy', 'pandas', 'python-dotenv')
NOISY_LOGGERS = ('matplotlib', 'numba', 'urllib3', 'asyncio')


def _file_handler(log_file: str, max_bytes: int, backups: int) -> logging.Handler:
    path = Path(log_file)
    path.parent.mkdir(parents=True, exist_ok=True)
    return logging.handlers.RotatingFileHandler(path, maxBytes=max_bytes, backupCount=backups,
                                                encoding='utf-8')


def setup_logger(
    name: Optional[str] = None,
    level: str = "INFO",
    log_file: Optional[str] = None,
    max_file_size: int = 10 * 1024 * 1024,  # 10MB
    backup_count: int = 5
) -> logging.Logger:
    """
    Configure one logger with a stdout handler and an optional rotating log file.

    Existing handlers are replaced, so repeated CLI invocations in one process
    do not duplicate output.

    Args:
        name: Logger name (None for the root logger)
        level: DEBUG, INFO, WARNING, ERROR or CRITICAL
        log_file: Optional log file path
        max_file_size: Rotation size in bytes
        backup_count: Rotated files kept

    Returns:
        The configured logger
    """
    logger = logging.getLogger(name)
    logger.handlers.clear()
    numeric_level = getattr(logging, level.upper(), logging.INFO)
    logger.setLevel(numeric_level)
    formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)

    handlers = [logging.StreamHandler(sys.stdout)]
    if log_file:
        try:
            handlers.append(_file_handler(log_file, max_file_size, backup_count))
        except OSError as e:
            logger.warning(f"File logging disabled ({log_file}): {e}")

    for handler in handlers:
        handler.setFormatter(formatter)
        handler.setLevel(numeric_level)
        logger.addHandler(handler)

    logger.propagate = False
    return logger


def configure_third_party_loggers():
    for name in NOISY_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)


def log_system_info(logger: logging.Logger):
    """Platform, Python and numerical stack versions; results depend on them."""
    logger.info(f"Platform: {platform.platform()} / Python {sys.version.split()[0]}")
    for package in KEY_PACKAGES:
        try:
            logger.info(f"{package} {metadata.version(package)}")
        except metadata.PackageNotFoundError:
            logger.warning(f"{package}: not installed")


def log_configuration(logger: logging.Logger, config):
    """Log every configuration value at INFO."""
    values = config.to_dict() if hasattr(config, 'to_dict') else vars(config)
    logger.info("Configuration: " + ", ".join(f"{key}={value}" for key, value in values.items()))


def setup_application_logging(log_level: str = "INFO", log_dir: Optional[str] = None) -> logging.Logger:
    """
    Setup logging for a corners-lab run.

    Module loggers are named after their modules (``core.hyperfun``...), so the
    root logger is configured as well as the ``corners_lab`` application logger.

    Args:
        log_level: Logging level
        log_dir: Directory for ``corners_lab.log`` (optional)

    Returns:
        Application logger
    """
    log_file = str(Path(log_dir) / LOG_FILE_NAME) if log_dir else None

    app = setup_logger(name=APP_LOGGER_NAME, level=log_level, log_file=log_file)
    root = setup_logger(name=None, level=log_level, log_file=log_file)
    root.propagate = True

    configure_third_party_loggers()
    app.info("corners-lab logging initialized")
    log_system_info(app)
    return app


class LoggerMixin:
    """Gives orchestrator classes a logger named ``module.Class``."""

    @property
    def logger(self) -> logging.Logger:
        return logging.getLogger(f"{self.__module__}.{self.__class__.__name__}")


def log_function_call(func):
    """Time a call at DEBUG; failures are logged at ERROR and re-raised."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        logger = logging.getLogger(func.__module__)
        start = time.perf_counter()
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            logger.error(f"{func.__name__} failed after {time.perf_counter() - start:.3f}s: {e}")
            raise
        logger.debug(f"{func.__name__} took {time.perf_counter() - start:.3f}s")
        return result

    return wrapper


def log_exception(logger: logging.Logger, exception: Exception, context: str = ""):
    """
    Log a failure at ERROR and its traceback at DEBUG.

    Args:
        logger: Logger to write to
        exception: The exception being handled
        context: Where it happened (command or test id)
    """
    where = f" in {context}" if context else ""
    logger.error(f"{type(exception).__name__}{where}: {exception}")
    logger.debug(f"Traceback:\n{traceback.format_exc()}")
