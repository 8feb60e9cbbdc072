"""
Compile the physical set P and the normal set N for a window length.

All rows are emitted in solve-space. A raw-space threshold c on vital v
becomes transform(v, c); an affine row over (possibly logged) vitals keeps
its shape because the solve-space map is affine in the logged values.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import RegistryError
from ..preprocess.transform import scale, transform
from .model import BigMRow, ConstraintSet, IndicatorGroup, LinearRow, LogicRow, RateRow
from .registry import VitalRegistry

logger = logging.getLogger(__name__)

WITNESS_FIO2 = 21.0

# Raw-unit thresholds of the implication rules.
HCO3_LOW = 10.0
BASE_EXCESS_ZERO = 0.0
LACTATE_HIGH = 6.0
PH_LOW = 7.0
PACO2_LOW = 35.0

# MAP is kept within this band around 2/3 DBP + 1/3 SBP.
MAP_BAND = (0.95, 1.05)
HCT_PER_HGB = 1.5


class _Emitter:
    """Accumulates rows and binaries while walking the time steps."""

    def __init__(self, registry: VitalRegistry, window_len: int, lower: np.ndarray, upper: np.ndarray):
        self.registry = registry
        self.W = window_len
        self.lower = lower
        self.upper = upper
        self.linear: List[LinearRow] = []
        self.groups: List[IndicatorGroup] = []
        self.binary_names: List[str] = []

    def has(self, *names: str) -> bool:
        return all(n in self.registry for n in names)

    def var(self, name: str, t: int) -> int:
        return self.registry.index(name) * self.W + t

    def threshold(self, name: str, raw: float) -> float:
        tau = float(transform(self.registry.lookup(name), raw))
        v = self.registry.index(name)
        if not self.lower[v, 0] <= tau <= self.upper[v, 0]:
            raise RegistryError(f"threshold {raw} lies outside the physical range", row=name)
        return tau

    def new_binary(self, name: str) -> int:
        self.binary_names.append(name)
        return len(self.binary_names) - 1

    # big-M rows with M taken from the variable's own box

    def upper_if(self, name: str, t: int, raw: float, z: int) -> BigMRow:
        """z = 1 implies x <= threshold; z = 0 leaves the box upper bound."""
        v, tau = self.registry.index(name), self.threshold(name, raw)
        hi = float(self.upper[v, t])
        return BigMRow(self.var(name, t), "le", hi, ((z, tau - hi),))

    def lower_if(self, name: str, t: int, raw: float, z: int) -> BigMRow:
        """z = 1 implies x >= threshold."""
        v, tau = self.registry.index(name), self.threshold(name, raw)
        lo = float(self.lower[v, t])
        return BigMRow(self.var(name, t), "ge", lo, ((z, tau - lo),))

    def upper_unless(self, name: str, t: int, raw: float, z: int) -> BigMRow:
        """z = 0 implies x <= threshold."""
        v, tau = self.registry.index(name), self.threshold(name, raw)
        hi = float(self.upper[v, t])
        return BigMRow(self.var(name, t), "le", tau, ((z, hi - tau),))

    def lower_unless(self, name: str, t: int, raw: float, z: int) -> BigMRow:
        """z = 0 implies x >= threshold."""
        v, tau = self.registry.index(name), self.threshold(name, raw)
        lo = float(self.lower[v, t])
        return BigMRow(self.var(name, t), "ge", tau, ((z, lo - tau),))

    def affine(self, terms: Sequence[Tuple[str, float]], rhs: float, t: int, label: str) -> None:
        """Append sum(a_v * g_v) <= rhs, with g the post-log coordinate of vital v."""
        coefs, shift = [], 0.0
        for name, a in terms:
            offset, width = scale(self.registry.lookup(name))
            coefs.append((self.var(name, t), a * width))
            shift += a * offset
        self.linear.append(LinearRow(tuple(coefs), rhs - shift, f"{label}@{t}"))


def _box(registry: VitalRegistry, window_len: int) -> Tuple[np.ndarray, np.ndarray]:
    lo = np.array([transform(s, s.phys_lo) for s in registry], dtype=float)
    hi = np.array([transform(s, s.phys_hi) for s in registry], dtype=float)
    return np.repeat(lo[:, None], window_len, axis=1), np.repeat(hi[:, None], window_len, axis=1)


def rate_bound(spec) -> float:
    """Solve-space hourly bound; logged vitals get a multiplicative cap anchored at the normal midpoint."""
    offset, width = scale(spec)
    if spec.log:
        mid = spec.norm_mid
        return float(np.log10((mid + 1.0 + spec.rate) / (mid + 1.0)) / width)
    return float(spec.rate / width)


def build_physical(registry: VitalRegistry, window_len: int) -> ConstraintSet:
    """Physical set P over a window of ``window_len`` hours."""
    if window_len < 2:
        raise ValueError(f"window_len must be >= 2, got {window_len}")

    lower, upper = _box(registry, window_len)
    em = _Emitter(registry, window_len, lower, upper)

    rates = [
        RateRow(v, t, rate_bound(spec))
        for v, spec in enumerate(registry)
        if spec.rate is not None
        for t in range(1, window_len)
    ]

    for t in range(window_len):
        if em.has("HCO3", "BaseExcess"):
            z = em.new_binary(f"hco3_low_base_excess@{t}")
            em.groups.append(IndicatorGroup("hco3_low_base_excess", t, (z,), (
                em.upper_if("HCO3", t, HCO3_LOW, z),
                em.upper_if("BaseExcess", t, BASE_EXCESS_ZERO, z),
                em.lower_unless("HCO3", t, HCO3_LOW, z),
            )))
        if em.has("Lactate", "BaseExcess"):
            z = em.new_binary(f"lactate_high_base_excess@{t}")
            em.groups.append(IndicatorGroup("lactate_high_base_excess", t, (z,), (
                em.lower_if("Lactate", t, LACTATE_HIGH, z),
                em.upper_if("BaseExcess", t, BASE_EXCESS_ZERO, z),
                em.upper_unless("Lactate", t, LACTATE_HIGH, z),
            )))
        if em.has("BaseExcess", "HCO3", "Lactate"):
            z = em.new_binary(f"base_excess_cause:z@{t}")
            y = em.new_binary(f"base_excess_cause:y@{t}")
            s = em.new_binary(f"base_excess_cause:s@{t}")
            em.groups.append(IndicatorGroup("base_excess_cause", t, (z, y, s), (
                em.upper_if("BaseExcess", t, BASE_EXCESS_ZERO, z),
                em.lower_unless("BaseExcess", t, BASE_EXCESS_ZERO, z),
                em.upper_if("HCO3", t, HCO3_LOW, y),
                em.lower_unless("HCO3", t, HCO3_LOW, y),
                em.lower_if("Lactate", t, LACTATE_HIGH, s),
                em.upper_unless("Lactate", t, LACTATE_HIGH, s),
            ), (LogicRow(((z, 1.0), (y, -1.0), (s, -1.0)), 0.0),)))
        if em.has("pH", "HCO3", "PaCO2"):
            z = em.new_binary(f"acidosis_cause:z@{t}")
            s = em.new_binary(f"acidosis_cause:s@{t}")
            y = em.new_binary(f"acidosis_cause:y@{t}")
            em.groups.append(IndicatorGroup("acidosis_cause", t, (z, s, y), (
                em.upper_if("pH", t, PH_LOW, z),
                em.lower_unless("pH", t, PH_LOW, z),
                em.upper_if("HCO3", t, HCO3_LOW, s),
                em.upper_if("PaCO2", t, PACO2_LOW, y),
                em.lower_unless("PaCO2", t, PACO2_LOW, y),
            ), (LogicRow(((z, 1.0), (s, -1.0), (y, -1.0)), 0.0),)))

        if em.has("MAP", "DBP", "SBP"):
            lo_band, hi_band = MAP_BAND
            em.affine([("DBP", lo_band * 2 / 3), ("SBP", lo_band / 3), ("MAP", -1.0)], 0.0, t, "map_band:lower")
            em.affine([("MAP", 1.0), ("DBP", -hi_band * 2 / 3), ("SBP", -hi_band / 3)], 0.0, t, "map_band:upper")
        if em.has("BilirubinDirect", "BilirubinTotal"):
            em.affine([("BilirubinDirect", 1.0), ("BilirubinTotal", -1.0)], 0.0, t, "bilirubin_order")
        if em.has("HCT", "Hgb"):
            em.affine([("Hgb", HCT_PER_HGB), ("HCT", -1.0)], 0.0, t, "hct_hgb")

    cs = ConstraintSet(
        vitals=tuple(registry.names),
        window_len=window_len,
        lower=lower,
        upper=upper,
        rates=tuple(rates),
        linear=tuple(em.linear),
        indicators=tuple(em.groups),
        binary_names=tuple(em.binary_names),
    )
    _attach_witness(cs, registry)
    logger.debug(
        "Built physical constraint set",
        extra={"window_len": window_len, "vitals": len(registry), "binaries": cs.n_binaries,
               "affine_rows": int(cs.A.shape[0])},
    )
    return cs


def build_normal(registry: VitalRegistry, window_len: int) -> ConstraintSet:
    """Normal set N: the unit box per vital, nothing else."""
    if window_len < 1:
        raise ValueError(f"window_len must be >= 1, got {window_len}")
    shape = (len(registry), window_len)
    cs = ConstraintSet(
        vitals=tuple(registry.names),
        window_len=window_len,
        lower=np.zeros(shape),
        upper=np.ones(shape),
    )
    cs.witness = np.full(shape, 0.5)
    return cs


def witness_raw(registry: VitalRegistry) -> Dict[str, float]:
    """Raw-unit reference point: normal midpoints, clamped into the physical box."""
    point = {s.name: min(max(s.norm_mid, s.phys_lo), s.phys_hi) for s in registry}
    if "FiO2" in point:
        point["FiO2"] = WITNESS_FIO2
    if {"MAP", "DBP", "SBP"} <= point.keys():
        point["MAP"] = 2 / 3 * point["DBP"] + 1 / 3 * point["SBP"]
    return point


def _attach_witness(cs: ConstraintSet, registry: VitalRegistry) -> None:
    raw = witness_raw(registry)
    column = np.array([transform(registry.lookup(n), raw[n]) for n in cs.vitals])
    point = np.repeat(column[:, None], cs.window_len, axis=1)
    problems = cs.violations(point, tol=1e-9)
    if problems:
        raise RegistryError(
            f"reference point violates {len(problems)} rows; first: {problems[0].label}",
            row=problems[0].vital,
        )
    cs.witness = point
    cs.witness_binaries = cs.binary_assignment(point, tol=1e-9) or ()


def solve_space_point(registry: VitalRegistry, raw: Dict[str, float], window_len: int,
                      base: Optional[Dict[str, float]] = None) -> np.ndarray:
    """Constant-over-time solve-space window from raw values, defaulting to the witness."""
    values = dict(base or witness_raw(registry))
    values.update(raw)
    column = np.array([transform(s, values[s.name]) for s in registry])
    return np.repeat(column[:, None], window_len, axis=1)
