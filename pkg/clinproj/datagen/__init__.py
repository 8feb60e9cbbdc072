"""Synthetic cohorts with known-feasible ground truth and controlled corruption."""

from .cohort import CohortGenerator, generate_cohort
from .corruption import corrupt

__all__ = ["CohortGenerator", "corrupt", "generate_cohort"]
