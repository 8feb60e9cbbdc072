"""Fixed-length overlapping windows ("sub-patients")."""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..constraints.registry import VitalRegistry
from ..schemas import Gender, SubPatientPayload
from .record import PatientRecord
from .scores import ScoreTables, sirs, sofa_partial
from .transform import transform_matrix

logger = logging.getLogger(__name__)


@dataclass
class SubPatient:
    """One window of a patient; ``data`` is |V| x W in solve-space."""
    sub_id: str
    patient_id: str
    window_start: int
    data: np.ndarray
    age: float
    gender: Gender
    sofa: int
    sirs: int
    label: int

    @property
    def window_end(self) -> int:
        return self.window_start + self.data.shape[1]

    def to_payload(self) -> SubPatientPayload:
        return SubPatientPayload(
            sub_id=self.sub_id,
            patient_id=self.patient_id,
            window_start=self.window_start,
            data=self.data.tolist(),
            age=self.age,
            gender=self.gender,
            sofa=self.sofa,
            sirs=self.sirs,
            label=self.label,
        )

    @classmethod
    def from_payload(cls, payload: SubPatientPayload) -> "SubPatient":
        return cls(
            sub_id=payload.sub_id,
            patient_id=payload.patient_id,
            window_start=payload.window_start,
            data=np.asarray(payload.data, dtype=float),
            age=payload.age,
            gender=payload.gender,
            sofa=payload.sofa,
            sirs=payload.sirs,
            label=payload.label,
        )


def window_starts(hours: int, window: int, stride: int) -> List[int]:
    """Starts of the full windows kept for a record of ``hours`` hours."""
    if window < 1 or stride < 1:
        raise ValueError("window and stride must be positive")
    if hours < 2 * window:
        return []
    return list(range(0, hours - window + 1, stride))


def make_subpatients(
    record: PatientRecord,
    registry: VitalRegistry,
    window: int = 6,
    stride: int = 3,
    scores: Optional[ScoreTables] = None,
) -> List[SubPatient]:
    """
    Cut an imputed raw record into sub-patients.

    Each window is transformed to solve-space; SOFA and SIRS are computed
    on its raw values. A window is labeled 1 when any of its hours is.
    """
    if np.isnan(record.values).any():
        raise ValueError(f"{record.patient_id}: impute before windowing")

    starts = window_starts(record.hours, window, stride)
    if not starts:
        logger.debug(
            f"Discarding short record {record.patient_id}",
            extra={"patient_id": record.patient_id, "hours": record.hours},
        )
        return []

    names = registry.names
    out = []
    for start in starts:
        raw = record.values[:, start:start + window]
        window_raw = dict(zip(names, raw))
        out.append(SubPatient(
            sub_id=f"{record.patient_id}:{start}",
            patient_id=record.patient_id,
            window_start=start,
            data=transform_matrix(registry, raw),
            age=record.age,
            gender=record.gender,
            sofa=sofa_partial(window_raw, scores),
            sirs=sirs(window_raw, scores),
            label=int(record.labels[start:start + window].any()),
        ))
    return out
