"""Test configuration for pytest."""

import itertools
import sys
from pathlib import Path

import numpy as np
import pytest

# Add package to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from clinproj.constraints import build_physical, solve_space_point, standard_registry  # noqa: E402
from clinproj.projection import solve_node_qp  # noqa: E402


@pytest.fixture(scope="session")
def registry():
    """The bundled 30-vital registry."""
    return standard_registry()


@pytest.fixture(scope="session")
def physical6(registry):
    """Physical set over the default 6-hour window."""
    return build_physical(registry, 6)


@pytest.fixture
def window_at(registry):
    """Build a constant solve-space window from raw overrides of the reference point."""
    def make(window_len: int = 6, reg=None, **raw):
        return solve_space_point(reg or registry, raw, window_len)
    return make


@pytest.fixture
def brute_force():
    """Exhaustive reference solver over every logic-feasible binary vector."""
    return brute_force_projection


def brute_force_projection(cs, d):
    """Returns (objective, point) of the cheapest assignment, or (inf, None) when nothing is feasible."""
    target = np.asarray(d, dtype=float).ravel()
    best = (float("inf"), None)
    for bits in itertools.product((0, 1), repeat=cs.n_binaries):
        fixed = dict(enumerate(bits))
        if not cs.logic_feasible(fixed):
            continue
        lo, hi = cs.bounds_for(fixed)
        if (lo > hi + 1e-12).any():
            continue
        sol = solve_node_qp(target, lo, hi, cs.A, cs.b, polish_passes=25)
        if sol is not None and sol.objective < best[0]:
            best = (sol.objective, sol.x)
    return best


SMALL_RUN = """
seed: 3
workers: 1
iterations: 1
preprocess: {{window: 6, stride: 3, label_lead_hours: 6}}
solver: {{gap_tol: 1.0e-6, feas_tol: 1.0e-6, node_budget: 100000}}
ml:
  clusters: 2
  train_ratio: 0.75
  minority_frac: 0.25
  smote_k: 3
  smote_multiplier: 3
  kmeans_restarts: 2
  threshold_step: 0.01
  gbt: {{max_depth: 2, n_rounds: 5}}
datagen:
  n_patients: {patients}
  hours_min: 18
  hours_max: 24
  sepsis_rate: 0.4
  corruption:
    out_of_range: {{"*": 0.002}}
    missing: {{"*": 0.2}}
    logical_pair: {logical_pair}
io:
  input: {root}/psv_in
  output: {root}/run
"""


@pytest.fixture
def small_config(tmp_path):
    """A fast run config writing under tmp_path; returns (path, loaded config)."""
    from clinproj.settings import load_config

    def make(patients: int = 24, logical_pair: float = 0.01):
        path = tmp_path / "run.yaml"
        path.write_text(SMALL_RUN.format(patients=patients, logical_pair=logical_pair, root=tmp_path))
        return path, load_config(path)
    return make
