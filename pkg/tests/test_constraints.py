"""Tests for the physical and normal constraint sets."""

import numpy as np
import pytest

from clinproj.constraints import build_normal, build_physical, load_registry
from clinproj.constraints.builder import rate_bound
from clinproj.errors import RegistryError
from clinproj.preprocess.transform import transform

FREE_VITALS = [
    "HeartRate", "O2Sat", "FiO2", "SaO2", "Chloride", "Creatinine", "Magnesium",
    "Phosphate", "Potassium", "TroponinI", "PTT", "WBC", "Fibrinogen", "Platelets",
]


def _labels(cs, point):
    return {v.label for v in cs.violations(point)}


class TestBuildPhysical:
    """Layout of the compiled physical set."""

    def test_layout_for_six_hours(self, physical6):
        """Thirty vitals, eight binaries per hour, rate and affine rows compiled into A."""
        assert physical6.n_vars == 180
        assert physical6.n_binaries == 48
        # five rate-limited vitals, two rows per hour pair; four affine rows per hour
        assert physical6.A.shape == (5 * 5 * 2 + 4 * 6, 180)
        assert len(physical6.b) == physical6.A.shape[0]

    def test_witness_is_feasible(self, physical6):
        """The reference point satisfies every row with all binaries at zero."""
        assert physical6.violations(physical6.witness) == []
        assert physical6.witness_binaries == (0,) * 48

    def test_short_window_rejected(self, registry):
        """Rate rows need at least two hours."""
        with pytest.raises(ValueError):
            build_physical(registry, 1)

    def test_free_vitals(self, physical6):
        """Vitals outside every rate, affine and indicator row."""
        assert physical6.free_vitals() == FREE_VITALS

    def test_components_cover_affine_rows(self, physical6):
        """Each affine row's variables fall inside a single component."""
        owner = {}
        for ci, (vars_, _) in enumerate(physical6.components):
            for j in vars_:
                owner[int(j)] = ci
        assert len(owner) == physical6.n_vars
        for a in physical6.A:
            assert len({owner[int(j)] for j in np.flatnonzero(a)}) == 1

    def test_subset_registry(self, registry):
        """Only the rules whose vitals are all present get emitted."""
        cs = build_physical(registry.subset(["HCO3", "BaseExcess"]), 3)
        assert cs.n_binaries == 3
        assert [g.label for g in cs.indicators] == ["hco3_low_base_excess"] * 3
        # BaseExcess is the only rate-limited vital in the subset
        assert cs.A.shape == (4, 6)

    def test_threshold_outside_physical_range(self, tmp_path):
        """A rule threshold the box cannot reach is a config error."""
        path = tmp_path / "vitals.yaml"
        path.write_text("""
vitals:
  - {name: HCO3, phys_lo: 12, phys_hi: 45, norm_lo: 22, norm_hi: 27}
  - {name: BaseExcess, phys_lo: -40, phys_hi: 20, norm_lo: -2, norm_hi: 2}
""")
        with pytest.raises(RegistryError) as exc:
            build_physical(load_registry(path), 2)
        assert exc.value.row == "HCO3"


class TestRateBound:
    """Solve-space hourly change limits."""

    def test_linear_vital(self, registry):
        """Temp may move 2 degrees an hour, one normal width."""
        assert rate_bound(registry.lookup("Temp")) == pytest.approx(1.0)

    def test_logged_vital_is_multiplicative(self, registry):
        """Glucose's cap is anchored at its normal midpoint."""
        spec = registry.lookup("Glucose")
        expected = transform(spec, 130.0 + 300.0) - transform(spec, 130.0)
        assert rate_bound(spec) == pytest.approx(expected)


class TestViolations:
    """Row-level feasibility reports."""

    def test_box(self, physical6, window_at):
        """Temp 50 is beyond the physical ceiling of 45."""
        bad = _labels(physical6, window_at(Temp=50.0))
        assert bad == {f"box:Temp@{t}" for t in range(6)}

    def test_rate(self, physical6, window_at):
        """A 3-degree jump in one hour breaks the Temp rate row."""
        point = window_at(Temp=37.0)
        point[physical6.vitals.index("Temp"), 1:] = (40.0 - 36.0) / 2.0
        assert _labels(physical6, point) == {"rate:Temp@1:up"}

    def test_hco3_base_excess(self, physical6, window_at):
        """Low bicarbonate with a positive base excess breaks the implication each hour."""
        assert _labels(physical6, window_at(HCO3=8.0, BaseExcess=5.0)) == {"hco3_low_base_excess"}
        assert len(physical6.violations(window_at(HCO3=8.0, BaseExcess=5.0))) == 6

    def test_map_band(self, physical6, window_at):
        """MAP 80 sits below 95% of 2/3 DBP + 1/3 SBP for DBP 70 / SBP 150."""
        bad = _labels(physical6, window_at(MAP=80.0, DBP=70.0, SBP=150.0))
        assert bad == {f"map_band:lower@{t}" for t in range(6)}

    def test_bilirubin_order(self, physical6, window_at):
        """Direct bilirubin may not exceed total bilirubin."""
        bad = _labels(physical6, window_at(BilirubinDirect=3.0, BilirubinTotal=2.0))
        assert bad == {f"bilirubin_order@{t}" for t in range(6)}

    def test_hct_hgb(self, physical6, window_at):
        """Hct 20 is below 1.5 x Hgb 15."""
        bad = _labels(physical6, window_at(HCT=20.0, Hgb=15.0))
        assert bad == {f"hct_hgb@{t}" for t in range(6)}

    def test_tolerance(self, physical6, window_at):
        """Violations within tol are not reported."""
        point = window_at()
        v = physical6.vitals.index("Temp")
        point[v] = physical6.upper[v] + 1e-8
        assert physical6.violations(point, tol=1e-6) == []
        assert len(physical6.violations(point, tol=1e-9)) == 6


class TestIndicatorGroups:
    """Binary bookkeeping of implication rules."""

    def test_logic_row_excludes_unexplained_deficit(self, physical6):
        """base_excess_cause admits seven of eight assignments, smallest first."""
        group = next(g for g in physical6.indicators if g.label == "base_excess_cause")
        z, y, s = group.binaries
        options = list(group.assignments())
        assert len(options) == 7
        assert options[0] == {z: 0, y: 0, s: 0}
        assert {z: 1, y: 0, s: 0} not in options
        assert not physical6.logic_feasible({z: 1, y: 0, s: 0})
        assert physical6.logic_feasible({z: 1, s: 1})

    def test_bounds_for_fixed_binary(self, physical6, registry):
        """Fixing the HCO3/BaseExcess binary to 1 caps both vitals at their thresholds."""
        group = next(g for g in physical6.indicators if g.label == "hco3_low_base_excess" and g.t == 0)
        lo, hi = physical6.bounds_for({group.binaries[0]: 1})
        hco3 = physical6.index(registry.index("HCO3"), 0)
        be = physical6.index(registry.index("BaseExcess"), 0)
        assert hi[hco3] == pytest.approx(-2.4)
        assert hi[be] == pytest.approx(0.5)
        lo0, hi0 = physical6.bounds_for({group.binaries[0]: 0})
        assert lo0[hco3] == pytest.approx(-2.4)
        assert hi0[hco3] == pytest.approx(physical6.upper.ravel()[hco3])

    def test_binary_assignment_none_when_unsatisfiable(self, physical6, window_at):
        """No assignment explains HCO3 8 with base excess +5."""
        assert physical6.binary_assignment(window_at(HCO3=8.0, BaseExcess=5.0)) is None


class TestBuildNormal:
    """The normal set is the unit box."""

    def test_unit_box(self, registry):
        cs = build_normal(registry, 4)
        assert np.all(cs.lower == 0.0) and np.all(cs.upper == 1.0)
        assert cs.n_binaries == 0 and cs.A.shape == (0, 120)
        assert cs.violations(cs.witness) == []

    def test_rejects_empty_window(self, registry):
        with pytest.raises(ValueError):
            build_normal(registry, 0)
