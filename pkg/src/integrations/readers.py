"""
Input Readers

Points files for density evaluation and structured run configuration files.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List

from utils.errors import ConfigError, PointsParseError

logger = logging.getLogger(__name__)

LEVEL_SEPARATOR = "|"
ENTRY_SEPARATOR = ","
COMMENT = "#"

RUN_CONFIG_SECTIONS = ('model', 'quadrature', 'output', 'run')

Configuration = List[List[float]]


def parse_points_line(text: str, line: int) -> Configuration:
    """Parse one configuration: levels separated by '|', entries by ','."""
    levels = []
    for chunk in text.split(LEVEL_SEPARATOR):
        chunk = chunk.strip()
        if not chunk:
            levels.append([])
            continue
        entries = []
        for token in chunk.split(ENTRY_SEPARATOR):
            token = token.strip()
            if not token:
                raise PointsParseError("empty entry", line)
            try:
                entries.append(float(token))
            except ValueError:
                raise PointsParseError(f"not a number: {token!r}", line) from None
        levels.append(entries)
    return levels


def read_points(path) -> List[Configuration]:
    """
    Read a points file: one configuration per line, '#' starts a comment.

    Args:
        path: Points file path

    Returns:
        Configurations in file order

    Raises:
        PointsParseError: Malformed line, tagged with its 1-based number
    """
    path = Path(path)
    points = []
    with open(path, 'r', encoding='utf-8') as f:
        for number, raw in enumerate(f, start=1):
            text = raw.split(COMMENT, 1)[0].strip()
            if text:
                points.append(parse_points_line(text, number))
    if not points:
        raise PointsParseError(f"no configurations in {path}")
    logger.info(f"Read {len(points)} configurations from {path}")
    return points


def load_run_config(path) -> Dict[str, Any]:
    """
    Load a JSON run configuration with nested sections (model, quadrature, output, run).

    Raises:
        ConfigError: Missing file, invalid JSON or unknown section
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Run configuration not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid run configuration {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Run configuration {path} must be a JSON object")
    unknown = sorted(k for k, v in data.items() if isinstance(v, dict) and k not in RUN_CONFIG_SECTIONS)
    if unknown:
        raise ConfigError(f"Unknown run configuration sections: {', '.join(unknown)}")
    return data
