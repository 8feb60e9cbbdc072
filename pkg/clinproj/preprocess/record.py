"""Hourly patient record."""

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from ..schemas import Gender


@dataclass
class PatientRecord:
    """
    One patient's hourly measurements in raw units.

    ``values`` is |V| x T with NaN for missing cells; row order follows
    ``vitals``. ``labels`` is the hourly sepsis label.
    """
    patient_id: str
    age: float
    gender: Gender
    vitals: Tuple[str, ...]
    values: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        self.gender = Gender(self.gender)
        if self.values.ndim != 2 or self.values.shape[0] != len(self.vitals):
            raise ValueError(f"{self.patient_id}: values must be |V| x T")
        if self.values.shape[1] < 1:
            raise ValueError(f"{self.patient_id}: record needs at least one hour")
        if self.labels.shape != (self.values.shape[1],):
            raise ValueError(f"{self.patient_id}: one label per hour required")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError(f"{self.patient_id}: labels must be 0 or 1")
        if np.isinf(self.values).any():
            raise ValueError(f"{self.patient_id}: values must be NaN or finite")

    @property
    def hours(self) -> int:
        return int(self.values.shape[1])

    @property
    def is_septic(self) -> bool:
        return bool(self.labels.any())

    def row(self, vital: str) -> np.ndarray:
        return self.values[self.vitals.index(vital)]

    def with_values(self, values: np.ndarray) -> "PatientRecord":
        return replace(self, values=np.array(values, dtype=float))
