# Test Configuration
# This file contains test-specific settings, reference formulas and fixtures

import os
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
THRESHOLDS_PATH = REPO_ROOT / "config" / "thresholds.json"

# Seeds
TEST_SEED = 20240117
ALT_SEED = 7

# Tolerances for deterministic routes
QUAD_RTOL = 1e-6
TIGHT_RTOL = 1e-10

# Wishart parameters used across modules
WISHART_BETA2 = {"beta": 2, "pi": (1.0, 2.0), "pi_hat": (0.5, 0.25)}
WISHART_BETA1 = {"beta": 1, "pi": (1.0, 2.0), "pi_hat": (0.5, 0.25)}

# Environment variables the configuration reads
CONFIG_ENV_VARS = (
    "CORNERS_LAB_SEED", "CORNERS_LAB_WORKERS", "CORNERS_LAB_QUAD_ORDER", "CORNERS_LAB_QUAD_TOL",
    "CORNERS_LAB_MC_SAMPLES", "CORNERS_LAB_NODE_BUDGET", "CORNERS_LAB_SIGNIFICANCE",
    "CORNERS_LAB_THRESHOLDS", "CORNERS_LAB_OUTPUT_FORMAT", "LOG_LEVEL", "LOG_DIR",
)

# Points file samples for the density command
SAMPLE_POINTS = {
    "good": "# previous | next\n2.0 | 3.0, 1.0\n1.5 | 2.5, 0.5\n",
    "bad_number": "2.0 | 3.0, x\n",
    "empty_entry": "2.0 | 3.0,,1.0\n",
    "comments_only": "# nothing here\n\n",
}


def schur_bialternant(parts, x) -> float:
    """Schur polynomial s_λ(x) = det(x_i^{λ_j + n - j}) / det(x_i^{n - j})."""
    x = np.asarray(x, dtype=float)
    n = x.size
    lam = list(parts) + [0] * (n - len(parts))
    if len(lam) > n:
        return 0.0
    exps = np.arange(n - 1, -1, -1)
    num = np.linalg.det(x[:, None] ** (np.asarray(lam) + exps)[None, :])
    den = np.linalg.det(x[:, None] ** exps[None, :])
    return float(num / den)


def eig_2x2_symmetric(a: float, b: float, c: float):
    """Eigenvalues of [[a, b], [b, c]] in decreasing order."""
    mid = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    return mid + rad, mid - rad


def truncated_qpoch(a: float, q: float, terms: int = 4000) -> float:
    """(a; q)_∞ by brute-force product."""
    return float(np.prod(1.0 - a * q ** np.arange(terms)))


def write_text(path: Path, text: str) -> str:
    path.write_text(text, encoding="utf-8")
    return str(path)


# Pytest fixtures

@pytest.fixture
def clean_env(monkeypatch):
    """Remove every configuration variable from the environment."""
    for name in CONFIG_ENV_VARS:
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("CORNERS_LAB_THRESHOLDS", str(THRESHOLDS_PATH))
    return monkeypatch


@pytest.fixture
def config(clean_env):
    """Default configuration with the repository threshold manifest."""
    from utils.config import Config
    return Config(log_level="WARNING")


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(TEST_SEED)


@pytest.fixture
def quad():
    """Default quadrature settings."""
    from models.params import QuadSpec
    return QuadSpec()


@pytest.fixture
def tmp_output():
    """Provide a temporary output directory."""
    path = tempfile.mkdtemp(prefix="corners-lab-")
    yield Path(path)
    # Cleanup
    if os.path.exists(path):
        shutil.rmtree(path)


@pytest.fixture
def points_file(tmp_output):
    """A well-formed points file with two kernel configurations."""
    return write_text(tmp_output / "points.txt", SAMPLE_POINTS["good"])
