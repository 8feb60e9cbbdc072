"""Vital registry and constraint-set compilation."""

from .builder import build_normal, build_physical, solve_space_point, witness_raw
from .model import ConstraintSet, IndicatorGroup, Violation
from .registry import VitalRegistry, load_registry, standard_registry

__all__ = [
    "ConstraintSet",
    "IndicatorGroup",
    "Violation",
    "VitalRegistry",
    "build_normal",
    "build_physical",
    "load_registry",
    "solve_space_point",
    "standard_registry",
    "witness_raw",
]
