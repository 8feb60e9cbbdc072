"""
Solve-space transform.

Each vital is optionally log-compressed with log10(x + 1) and then scaled so
its normal range maps onto [0, 1].
"""

from typing import Tuple, Union

import numpy as np

from ..errors import TransformDomainError
from ..schemas import VitalSpec

ArrayLike = Union[float, np.ndarray]


def _g(spec: VitalSpec, raw: ArrayLike) -> ArrayLike:
    return np.log10(np.asarray(raw, dtype=float) + 1.0) if spec.log else np.asarray(raw, dtype=float)


def scale(spec: VitalSpec) -> Tuple[float, float]:
    """(offset, width) of the affine step, in the post-log coordinates."""
    lo, hi = _g(spec, spec.norm_lo), _g(spec, spec.norm_hi)
    return float(lo), float(hi - lo)


def transform(spec: VitalSpec, raw: ArrayLike) -> ArrayLike:
    """Raw units to solve-space."""
    _check_domain(spec, raw)
    offset, width = scale(spec)
    out = (_g(spec, raw) - offset) / width
    return float(out) if np.ndim(out) == 0 else out


def inverse_transform(spec: VitalSpec, x: ArrayLike) -> ArrayLike:
    """Solve-space back to raw units."""
    offset, width = scale(spec)
    y = np.asarray(x, dtype=float) * width + offset
    out = np.power(10.0, y) - 1.0 if spec.log else y
    return float(out) if np.ndim(out) == 0 else out


def _check_domain(spec: VitalSpec, raw: ArrayLike) -> None:
    if spec.log and np.any(np.asarray(raw, dtype=float) <= -1.0):
        raise TransformDomainError(f"{spec.name} is log-transformed; raw values must exceed -1")


def transform_matrix(registry, raw: np.ndarray) -> np.ndarray:
    """Transform a |V| x T raw matrix row by row (NaN passes through)."""
    raw = np.asarray(raw, dtype=float)
    return np.vstack([transform(spec, raw[v]) for v, spec in enumerate(registry)])


def inverse_matrix(registry, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.vstack([inverse_transform(spec, x[v]) for v, spec in enumerate(registry)])
