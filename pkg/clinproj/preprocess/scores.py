"""
Window-level SOFA (partial) and SIRS scores.

Thresholds come from ``config/scores.yaml``. A window's score takes the
worst hourly value of each component; components whose vitals are absent
from the window are skipped.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
import yaml

from ..errors import RegistryError
from ..settings import DEFAULT_SCORES_PATH

logger = logging.getLogger(__name__)

WindowRaw = Mapping[str, np.ndarray]


@dataclass(frozen=True)
class SofaComponent:
    name: str
    direction: str
    steps: tuple
    vital: Optional[str] = None
    ratio: Optional[tuple] = None

    def hourly(self, window: WindowRaw) -> Optional[np.ndarray]:
        if self.ratio is not None:
            num, den = self.ratio
            if num not in window or den not in window:
                return None
            # FiO2 is recorded in percent.
            return np.asarray(window[num], float) / (np.asarray(window[den], float) / 100.0)
        if self.vital not in window:
            return None
        return np.asarray(window[self.vital], float)

    def points(self, values: np.ndarray) -> np.ndarray:
        out = np.zeros(values.shape, dtype=int)
        assigned = np.zeros(values.shape, dtype=bool)
        for bound, pts in self.steps:
            hit = values < bound if self.direction == "below" else values >= bound
            hit &= ~assigned
            out[hit] = pts
            assigned |= hit
        return out


@dataclass(frozen=True)
class SirsCriterion:
    vital: str
    below: Optional[float] = None
    above: Optional[float] = None
    alternative: Optional["SirsCriterion"] = None

    def met(self, window: WindowRaw) -> bool:
        if self.vital in window:
            values = np.asarray(window[self.vital], float)
            if self.below is not None and (values < self.below).any():
                return True
            if self.above is not None and (values > self.above).any():
                return True
        return self.alternative is not None and self.alternative.met(window)


@dataclass(frozen=True)
class ScoreTables:
    sofa: tuple
    sirs: tuple


def _criterion(raw: Dict[str, Any]) -> SirsCriterion:
    alt = raw.get("or")
    return SirsCriterion(
        vital=raw["vital"],
        below=raw.get("below"),
        above=raw.get("above"),
        alternative=_criterion(alt) if alt else None,
    )


def load_score_tables(path: Union[str, Path]) -> ScoreTables:
    """Parse a score-threshold config file."""
    path = Path(path)
    if not path.exists():
        logger.error(f"Score config not found: {path}")
        raise FileNotFoundError(f"Score config not found: {path}")
    with open(path, "r") as f:
        raw = yaml.safe_load(f) or {}

    components: List[SofaComponent] = []
    for name, body in raw.get("sofa", {}).items():
        try:
            direction = body["direction"]
            if direction not in ("below", "at_or_above"):
                raise ValueError(f"unknown direction {direction}")
            components.append(SofaComponent(
                name=name,
                direction=direction,
                steps=tuple((float(b), int(p)) for b, p in body["steps"]),
                vital=body.get("vital"),
                ratio=tuple(body["ratio"]) if "ratio" in body else None,
            ))
        except (KeyError, TypeError, ValueError) as e:
            raise RegistryError(f"invalid SOFA component: {e}", row=name) from e

    criteria = []
    for i, body in enumerate(raw.get("sirs", [])):
        try:
            criteria.append(_criterion(body))
        except (KeyError, TypeError) as e:
            raise RegistryError(f"invalid SIRS criterion: {e}", row=f"sirs#{i}") from e

    return ScoreTables(sofa=tuple(components), sirs=tuple(criteria))


@lru_cache(maxsize=1)
def standard_scores() -> ScoreTables:
    return load_score_tables(DEFAULT_SCORES_PATH)


def sofa_partial(window_raw: WindowRaw, tables: Optional[ScoreTables] = None) -> int:
    """Sum of the computable SOFA sub-scores, worst hour per component."""
    tables = tables or standard_scores()
    total = 0
    for component in tables.sofa:
        values = component.hourly(window_raw)
        if values is None or values.size == 0:
            continue
        total += int(component.points(values).max())
    return total


def sirs(window_raw: WindowRaw, tables: Optional[ScoreTables] = None) -> int:
    """Number of SIRS criteria met at any hour of the window."""
    tables = tables or standard_scores()
    return sum(1 for criterion in tables.sirs if criterion.met(window_raw))
