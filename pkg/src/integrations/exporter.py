"""
Result Exporter

Writes samples, density values, limit trajectories and suite reports as CSV or JSON
through pandas. Every file starts with a versioned header recording the seed and the
run parameters; floats are written with 17 significant digits so values round-trip.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from models.report import SuiteReport
from models.spectra import MultilevelSample
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FLOAT_FORMAT = "%.17g"


def header_lines(seed: Optional[int], params: Dict[str, Any]) -> List[str]:
    return [f"# corners-lab-schema: {SCHEMA_VERSION}",
            f"# seed: {seed if seed is not None else ''}",
            f"# params: {json.dumps(params, sort_keys=True, default=str)}"]


def _json_float(value: float) -> Any:
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


class Exporter:
    """CSV/JSON writer for every command output."""

    def __init__(self, config=None, fmt: Optional[str] = None):
        self.config = config
        self.fmt = (fmt or (config.OUTPUT_FORMAT if config is not None else 'csv')).lower()
        if self.fmt not in ('csv', 'json'):
            raise ConfigError(f"Unsupported output format: {self.fmt}")

    def _prepare(self, output_path) -> Path:
        path = Path(output_path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"Cannot create output directory {path.parent}: {e}") from e
        return path

    def _write(self, df: pd.DataFrame, output_path, seed: Optional[int], params: Dict[str, Any]) -> Path:
        path = self._prepare(output_path)
        try:
            with open(path, 'w', encoding='utf-8', newline='') as f:
                if self.fmt == 'csv':
                    f.write("\n".join(header_lines(seed, params)) + "\n")
                    df.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
                else:
                    rows = [{k: _json_float(v) for k, v in row.items()} for row in df.to_dict(orient='records')]
                    json.dump({'schema': SCHEMA_VERSION, 'seed': seed, 'params': params, 'rows': rows},
                              f, indent=2, default=str)
                    f.write("\n")
        except OSError as e:
            raise ConfigError(f"Cannot write {path}: {e}") from e
        logger.info(f"Wrote {len(df)} rows to {path}")
        return path

    @staticmethod
    def samples_frame(samples: Sequence[MultilevelSample]) -> pd.DataFrame:
        """One row per (draw, level) with eigenvalue columns eig_1..eig_k (empty past the level length)."""
        width = max((len(lvl) for s in samples for lvl in s.levels), default=0)
        columns = ['draw', 'level'] + [f"eig_{i}" for i in range(1, width + 1)]
        rows = []
        for s in samples:
            for row in s.to_rows():
                values = list(row['values']) + [np.nan] * (width - len(row['values']))
                rows.append([row['draw'], row['level']] + values)
        return pd.DataFrame(rows, columns=columns)

    def export_samples(self, samples: Sequence[MultilevelSample], output_path, seed: Optional[int],
                       params: Dict[str, Any]) -> Path:
        return self._write(self.samples_frame(samples), output_path, seed, params)

    def export_densities(self, points: Sequence[str], density_id: str, log_values: Sequence[float],
                         output_path, params: Dict[str, Any], seed: Optional[int] = None) -> Path:
        """Rows (point, density, log_density); points off the support carry -inf."""
        df = pd.DataFrame({'point': list(points), 'density': density_id,
                           'log_density': np.asarray(log_values, dtype=float)})
        return self._write(df, output_path, seed, params)

    def export_trajectory(self, rows: List[Dict[str, float]], check_id: str, output_path,
                          params: Dict[str, Any]) -> Path:
        df = pd.DataFrame(rows, columns=['eps', 'value', 'limit', 'rel_error'])
        df.insert(0, 'check', check_id)
        return self._write(df, output_path, None, params)

    def export_table(self, rows: List[Dict[str, Any]], output_path, params: Dict[str, Any],
                     seed: Optional[int] = None) -> Path:
        return self._write(pd.DataFrame(rows), output_path, seed, params)

    def export_report(self, report: SuiteReport, output_path) -> Path:
        """Suite reports are always JSON: the summary plus one object per test."""
        path = self._prepare(output_path)
        payload = {'schema': SCHEMA_VERSION, **report.summary(),
                   'reports': [r.to_dict() for r in report.reports]}
        try:
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(payload, f, indent=2, default=str)
                f.write("\n")
        except OSError as e:
            raise ConfigError(f"Cannot write {path}: {e}") from e
        logger.info(f"Wrote report for {len(report.reports)} tests to {path}")
        return path

    @staticmethod
    def summary_table(report: SuiteReport) -> str:
        """Human-readable table of a suite run."""
        alpha = report.corrected_significance
        df = pd.DataFrame([{'test': r.test_id, 'kind': r.kind.value, 'statistic': r.statistic,
                            'p_value': r.p_value, 'threshold': r.threshold,
                            'verdict': 'pass' if r.passes_at(alpha) else 'fail',
                            'runtime_s': round(r.runtime, 2)} for r in report.reports])
        if df.empty:
            return "(no tests)"
        return df.to_string(index=False, float_format=lambda v: f"{v:.4g}")
