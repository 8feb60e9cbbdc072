"""Tests for the physical projection solver."""

from unittest.mock import patch

import numpy as np
import pytest

from clinproj.constraints import build_physical, solve_space_point
from clinproj.preprocess.transform import inverse_transform, transform
from clinproj.projection import (
    BranchAndBound,
    ProjectionEngine,
    SolverOptions,
    project_physical,
    solve_node_qp,
    summarize,
    verify_feasibility,
)
from clinproj.schemas import SolveStatus

# (vital subset, window length, instances)
ORACLE_CASES = [
    (("HCO3", "BaseExcess"), 2, 40),
    (("HCO3", "BaseExcess"), 3, 40),
    (("Lactate", "BaseExcess"), 3, 40),
    (("pH", "HCO3", "PaCO2"), 2, 40),
    (("MAP", "DBP", "SBP"), 2, 40),
    (("BilirubinDirect", "BilirubinTotal", "Temp"), 3, 40),
    (("BaseExcess", "HCO3", "Lactate"), 2, 20),
]


class TestKnownProjections:
    """Hand-checked projections."""

    def test_feasible_input_is_returned_unchanged(self, physical6, window_at):
        """An already-physical window costs nothing and explores no nodes."""
        d = window_at(Temp=37.5, HeartRate=110.0)
        result = project_physical(d, physical6)
        assert result.status == SolveStatus.OPTIMAL
        assert result.nodes_explored == 0
        assert result.objective == 0.0
        assert np.array_equal(result.corrected, d)

    def test_bicarbonate_raised_to_threshold(self, registry, window_at):
        """HCO3 8 with base excess +5 is cheapest fixed by lifting HCO3 to 10."""
        sub = registry.subset(["HCO3", "BaseExcess"])
        cs = build_physical(sub, 2)
        d = window_at(2, reg=sub, HCO3=8.0, BaseExcess=5.0)
        result = project_physical(d, cs)
        assert result.status == SolveStatus.OPTIMAL
        assert result.objective == pytest.approx(0.32, rel=1e-6)
        hco3 = inverse_transform(sub.lookup("HCO3"), result.corrected[sub.index("HCO3")])
        base_excess = inverse_transform(sub.lookup("BaseExcess"), result.corrected[sub.index("BaseExcess")])
        assert np.allclose(hco3, 10.0, atol=1e-6)
        assert np.allclose(base_excess, 5.0, atol=1e-6)
        assert result.phys_dist[sub.index("BaseExcess")] == pytest.approx(0.0, abs=1e-10)

    def test_bicarbonate_full_registry(self, physical6, window_at):
        """The same repair costs 0.16 per hour over six hours with every vital present."""
        result = project_physical(window_at(HCO3=8.0, BaseExcess=5.0), physical6)
        assert result.status == SolveStatus.OPTIMAL
        assert result.objective == pytest.approx(0.96, rel=1e-6)
        assert verify_feasibility(result.corrected, physical6) == []

    def test_temperature_clamped_to_physical_ceiling(self, physical6, window_at, registry):
        """Temp 50 comes down to 45 at a cost of 2.5^2 per hour."""
        result = project_physical(window_at(Temp=50.0), physical6)
        assert result.objective == pytest.approx(37.5, rel=1e-9)
        temp = result.corrected[registry.index("Temp")]
        assert np.allclose(temp, transform(registry.lookup("Temp"), 45.0))
        assert int(np.argmax(result.phys_dist)) == registry.index("Temp")

    def test_map_band_matches_node_qp(self, registry, window_at):
        """Without binaries the projection is a single convex QP."""
        sub = registry.subset(["MAP", "DBP", "SBP"])
        cs = build_physical(sub, 2)
        d = window_at(2, reg=sub, MAP=80.0, DBP=70.0, SBP=150.0)
        result = project_physical(d, cs)
        ref = solve_node_qp(d.ravel(), cs.lower.ravel(), cs.upper.ravel(), cs.A, cs.b)
        assert result.objective == pytest.approx(ref.objective, rel=1e-7)
        assert result.binaries == ()
        assert verify_feasibility(result.corrected, cs) == []

    def test_shape_and_values_checked(self, physical6, window_at):
        """Wrong window length and NaN input are rejected."""
        with pytest.raises(ValueError):
            project_physical(window_at(5), physical6)
        d = window_at()
        d[0, 0] = np.nan
        with pytest.raises(ValueError):
            project_physical(d, physical6)


class TestSolverProperties:
    """Idempotence, determinism and the node budget."""

    def test_idempotent(self, physical6, window_at):
        """Projecting a projection changes nothing."""
        rng = np.random.default_rng(11)
        d = window_at(HCO3=8.0, BaseExcess=5.0, Temp=50.0) + rng.normal(0, 0.5, size=(30, 6))
        first = project_physical(d, physical6)
        second = project_physical(first.corrected, physical6)
        assert second.objective == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(second.corrected, first.corrected, atol=1e-9)

    def test_deterministic(self, physical6, window_at):
        """Identical input gives identical output."""
        rng = np.random.default_rng(5)
        d = physical6.witness + rng.normal(0, 0.5, size=(30, 6))
        a = BranchAndBound(physical6).solve(d)
        b = BranchAndBound(physical6).solve(d)
        assert np.array_equal(a.corrected, b.corrected)
        assert a.binaries == b.binaries
        assert a.objective == b.objective

    def test_node_limit_returns_incumbent(self, registry, window_at):
        """With no nodes allowed the starting incumbent is reported as NODE_LIMIT."""
        sub = registry.subset(["HCO3", "BaseExcess"])
        cs = build_physical(sub, 2)
        d = window_at(2, reg=sub, HCO3=8.0, BaseExcess=5.0)
        with patch.object(BranchAndBound, "_probe", return_value={}):
            result = BranchAndBound(cs, SolverOptions(node_budget=0)).solve(d)
        assert result.status == SolveStatus.NODE_LIMIT
        assert result.objective == pytest.approx(0.32, rel=1e-6)
        assert verify_feasibility(result.corrected, cs) == []

    def test_probing_settles_easy_instances(self, registry, window_at):
        """Probing fixes the losing branch so no node is explored."""
        sub = registry.subset(["HCO3", "BaseExcess"])
        cs = build_physical(sub, 2)
        result = BranchAndBound(cs, SolverOptions(node_budget=0)).solve(
            window_at(2, reg=sub, HCO3=8.0, BaseExcess=5.0)
        )
        assert result.status == SolveStatus.OPTIMAL
        assert result.nodes_explored == 0


class TestAgainstEnumeration:
    """The solver matches exhaustive enumeration of every binary assignment."""

    @pytest.mark.parametrize("vitals,window_len,count", ORACLE_CASES)
    def test_matches_brute_force(self, registry, brute_force, vitals, window_len, count):
        sub = registry.subset(vitals)
        cs = build_physical(sub, window_len)
        solver = BranchAndBound(cs)
        rng = np.random.default_rng([len(v) for v in vitals] + [window_len])
        for _ in range(count):
            d = cs.witness + rng.normal(0.0, 2.0, size=cs.witness.shape)
            result = solver.solve(d)
            expected, _ = brute_force(cs, d)
            assert result.status == SolveStatus.OPTIMAL
            assert result.objective == pytest.approx(expected, rel=1e-5, abs=1e-7)
            assert verify_feasibility(result.corrected, cs) == []


class TestProjectionEngine:
    """Batch projection."""

    def test_results_in_input_order(self, physical6, window_at):
        """Process-pool results line up with the serial ones."""
        windows = [window_at(Temp=t) for t in (37.0, 50.0, 20.0)] + [window_at(HCO3=8.0, BaseExcess=5.0)]
        serial = ProjectionEngine(physical6, workers=1).project_all(windows)
        pooled = ProjectionEngine(physical6, workers=2).project_all(windows)
        assert [r.objective for r in serial] == pytest.approx([r.objective for r in pooled])
        assert serial[0].objective == 0.0
        assert serial[1].objective == pytest.approx(37.5)

    def test_summarize_counts(self, physical6, window_at):
        """Corrected cells, statuses and per-vital distances are tallied."""
        windows = [window_at(), window_at(Temp=50.0)]
        results = ProjectionEngine(physical6).project_all(windows)
        summary = summarize(results, physical6.vitals, windows)
        assert summary["windows"] == 2
        assert summary["status"]["optimal"] == 2
        assert summary["corrected_cells"] == 6
        assert summary["by_vital"][0]["vital"] == "Temp"
        assert summary["by_vital"][0]["phys_dist"] == pytest.approx(37.5)


def test_solve_space_point_defaults_to_witness(registry, physical6):
    """An empty override reproduces the constraint set's reference point."""
    assert np.allclose(solve_space_point(registry, {}, 6), physical6.witness)
