"""Feasibility reports."""

from typing import List

import numpy as np

from ..constraints.model import ConstraintSet, Violation


def verify_feasibility(point: np.ndarray, constraint_set: ConstraintSet, tol: float = 1e-6) -> List[Violation]:
    """Every row of ``constraint_set`` that ``point`` violates by more than ``tol``."""
    point = np.asarray(point, dtype=float)
    if point.size != constraint_set.n_vars:
        raise ValueError(f"point has {point.size} entries, constraint set expects {constraint_set.n_vars}")
    return constraint_set.violations(point.ravel(), tol)
