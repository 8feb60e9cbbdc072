"""
Synthetic cohort generation.

Trajectories are clipped AR(1) paths around the normal midpoint of every
vital, built in solve-space so one noise level suits all units. Every
patient, septic or not, shows brief one-hour deviations outside the normal
range in randomly chosen vitals. Septic patients additionally carry
sustained deviations in a few vitals, ramping in at or before the first
positive label, drawn from the same depth range as the brief ones: a single
hour cannot tell the two apart, only persistence within a vital can. Every
record is checked against the physical set before it is returned.
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..constraints.builder import MAP_BAND, WITNESS_FIO2, build_physical, rate_bound
from ..constraints.model import ConstraintSet
from ..constraints.registry import VitalRegistry, standard_registry
from ..preprocess.record import PatientRecord
from ..preprocess.transform import inverse_transform, transform
from ..projection.feasibility import verify_feasibility
from ..schemas import Gender

logger = logging.getLogger(__name__)

AR_PHI = 0.8
AR_SIGMA = 0.08
# Baseline paths stay inside this band of the solve-space normal box.
BASELINE_BAND = (0.05, 0.95)
RATE_MARGIN = 0.9
AGE_RANGE = (18.0, 90.0)

# Sides of the normal box each vital may leave. Lactate stays below the
# lactate/base-excess threshold at every depth drawn here.
DEVIATIONS: Dict[str, Tuple[str, ...]] = {
    "HeartRate": ("high", "low"),
    "O2Sat": ("low",),
    "Temp": ("high", "low"),
    "Resp": ("high",),
    "WBC": ("high", "low"),
    "Platelets": ("low",),
    "Creatinine": ("high",),
    "BilirubinTotal": ("high",),
    "Lactate": ("high",),
    "Potassium": ("high", "low"),
    "Chloride": ("high", "low"),
    "Magnesium": ("high", "low"),
    "Phosphate": ("high", "low"),
    "PTT": ("high",),
    "Fibrinogen": ("high", "low"),
}
# Solve-space distance beyond the normal edge, shared by brief and sustained deviations.
DEVIATION_DEPTH = (0.3, 0.9)
# Mean number of brief deviations per patient-hour.
TRANSIENT_RATE = 2.0
SUSTAINED_VITALS = (1, 3)
RAMP_HOURS = (2, 4)
MAX_EXTRA_LEAD = 4

# Raw-unit clamps that keep the implication rules on their benign branch.
HCO3_FLOOR = 12.0
LACTATE_CEIL = 5.0
PH_FLOOR = 7.05
BILIRUBIN_TOTAL_FLOOR = 0.5


class CohortGenerator:
    """Draws feasible patient records from one seeded generator."""

    def __init__(self, registry: Optional[VitalRegistry] = None, seed: int = 0,
                 lead_hours: int = 6):
        self.registry = registry or standard_registry()
        self.rng = np.random.default_rng(seed)
        self.lead_hours = lead_hours
        self._sets: Dict[int, ConstraintSet] = {}

    def _baseline(self, hours: int) -> np.ndarray:
        V = len(self.registry)
        x = np.empty((V, hours))
        x[:, 0] = self.rng.uniform(0.3, 0.7, size=V)
        noise = self.rng.normal(0.0, AR_SIGMA, size=(V, hours))
        for t in range(1, hours):
            x[:, t] = 0.5 + AR_PHI * (x[:, t - 1] - 0.5) + noise[:, t]
        return np.clip(x, *BASELINE_BAND)

    @property
    def _candidates(self) -> List[str]:
        return [n for n in DEVIATIONS if n in self.registry]

    def _deviation(self, name: str) -> float:
        """Solve-space level of one out-of-normal value for ``name``."""
        depth = self.rng.uniform(*DEVIATION_DEPTH)
        side = DEVIATIONS[name][int(self.rng.integers(len(DEVIATIONS[name])))]
        return 1.0 + depth if side == "high" else -depth

    def _transients(self, x: np.ndarray) -> None:
        candidates = self._candidates
        if not candidates:
            return
        counts = np.minimum(self.rng.poisson(TRANSIENT_RATE, size=x.shape[1]), len(candidates))
        for t, n in enumerate(counts):
            for name in self.rng.choice(candidates, size=n, replace=False):
                x[self.registry.index(name), t] = self._deviation(name)

    def _excursion(self, x: np.ndarray, start: int) -> List[str]:
        candidates = self._candidates
        if not candidates:
            return []
        n = min(len(candidates), int(self.rng.integers(SUSTAINED_VITALS[0], SUSTAINED_VITALS[1] + 1)))
        chosen = sorted(self.rng.choice(candidates, size=n, replace=False).tolist())
        hours = x.shape[1]
        for name in chosen:
            v = self.registry.index(name)
            target = self._deviation(name)
            ramp = int(self.rng.integers(RAMP_HOURS[0], RAMP_HOURS[1] + 1))
            r = np.clip((np.arange(hours) - start + 1) / ramp, 0.0, 1.0)
            x[v] = (1.0 - r) * x[v] + r * target
        return chosen

    def _limit_rates(self, x: np.ndarray) -> None:
        for v, spec in enumerate(self.registry):
            if spec.rate is None:
                continue
            step = RATE_MARGIN * rate_bound(spec)
            for t in range(1, x.shape[1]):
                x[v, t] = np.clip(x[v, t], x[v, t - 1] - step, x[v, t - 1] + step)

    def _to_raw(self, x: np.ndarray) -> np.ndarray:
        raw = np.vstack([inverse_transform(spec, x[v]) for v, spec in enumerate(self.registry)])
        for v, spec in enumerate(self.registry):
            raw[v] = np.clip(raw[v], spec.phys_lo, spec.phys_hi)

        def row(name: str) -> Optional[np.ndarray]:
            return raw[self.registry.index(name)] if name in self.registry else None

        if (fio2 := row("FiO2")) is not None:
            fio2[:] = WITNESS_FIO2 + 20.0 * x[self.registry.index("FiO2")].clip(0.0, 1.0)
        if (bilt := row("BilirubinTotal")) is not None:
            np.maximum(bilt, BILIRUBIN_TOTAL_FLOOR, out=bilt)
            if (bild := row("BilirubinDirect")) is not None:
                np.minimum(bild, bilt, out=bild)
        if (be := row("BaseExcess")) is not None:
            np.maximum(be, 0.0, out=be)
        if (hco3 := row("HCO3")) is not None:
            np.maximum(hco3, HCO3_FLOOR, out=hco3)
        if (lactate := row("Lactate")) is not None:
            np.minimum(lactate, LACTATE_CEIL, out=lactate)
        if (ph := row("pH")) is not None:
            np.maximum(ph, PH_FLOOR, out=ph)
        if (hgb := row("Hgb")) is not None and (hct := row("HCT")) is not None:
            np.maximum(hct, 1.5 * hgb, out=hct)
        mapv, dbp, sbp = row("MAP"), row("DBP"), row("SBP")
        if mapv is not None and dbp is not None and sbp is not None:
            lo, hi = MAP_BAND
            factor = self.rng.uniform(lo + 0.02, hi - 0.02, size=mapv.shape)
            mapv[:] = factor * (2.0 / 3.0 * dbp + 1.0 / 3.0 * sbp)
        return raw

    def _constraint_set(self, hours: int) -> ConstraintSet:
        if hours not in self._sets:
            self._sets[hours] = build_physical(self.registry, hours)
        return self._sets[hours]

    def patient(self, patient_id: str, hours: int, septic: bool) -> PatientRecord:
        """One feasible record; septic records carry labels from onset - lead onward."""
        if hours < 2:
            raise ValueError(f"records need at least 2 hours, got {hours}")
        x = self._baseline(hours)
        self._transients(x)
        labels = np.zeros(hours, dtype=int)
        if septic:
            label_start = int(self.rng.integers(min(MAX_EXTRA_LEAD, hours - 1), hours))
            start = label_start - int(self.rng.integers(0, min(MAX_EXTRA_LEAD, label_start) + 1))
            self._excursion(x, start)
            labels[label_start:] = 1
        self._limit_rates(x)
        raw = self._to_raw(x)

        problems = verify_feasibility(
            np.vstack([transform(s, raw[v]) for v, s in enumerate(self.registry)]),
            self._constraint_set(hours),
        )
        if problems:
            raise RuntimeError(f"{patient_id}: generated record violates {problems[0].label}")

        return PatientRecord(
            patient_id=patient_id,
            age=float(np.round(self.rng.uniform(*AGE_RANGE), 1)),
            gender=Gender.M if self.rng.random() < 0.5 else Gender.F,
            vitals=tuple(self.registry.names),
            values=raw,
            labels=labels,
        )


def generate_cohort(
    n_patients: int,
    hours_range: Tuple[int, int] = (24, 60),
    sepsis_rate: float = 0.2,
    seed: int = 0,
    registry: Optional[VitalRegistry] = None,
) -> List[PatientRecord]:
    """
    Draw ``n_patients`` feasible records.

    Each patient is septic with probability ``sepsis_rate``; lengths are
    uniform over ``hours_range`` inclusive.
    """
    if not 0.0 < sepsis_rate < 1.0:
        raise ValueError(f"sepsis_rate must be in (0, 1), got {sepsis_rate}")
    lo, hi = hours_range
    if not 2 <= lo <= hi:
        raise ValueError(f"invalid hours_range {hours_range}")

    gen = CohortGenerator(registry, seed)
    records = []
    for i in range(n_patients):
        hours = int(gen.rng.integers(lo, hi + 1))
        septic = bool(gen.rng.random() < sepsis_rate)
        records.append(gen.patient(f"p{i + 1:06d}", hours, septic))

    n_septic = sum(r.is_septic for r in records)
    logger.info(
        f"Generated {len(records)} patients ({n_septic} septic)",
        extra={"patients": len(records), "septic": n_septic, "seed": seed},
    )
    return records
