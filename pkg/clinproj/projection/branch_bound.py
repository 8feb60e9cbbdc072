"""
Best-first branch-and-bound for the physical projection.

Binaries only tighten single-variable bounds, so a node relaxation is the
box hull of every undecided implication plus the affine rows. The affine
rows split the variables into small independent components; each node
re-solves only components whose bounds changed.
"""

import heapq
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..constraints.model import ConstraintSet
from ..errors import NodeQPError
from ..schemas import SolveStatus
from .node_qp import KKT_TOL, solve_node_qp
from .result import ProjectionResult

logger = logging.getLogger(__name__)

Fixed = Dict[int, int]


@dataclass(frozen=True)
class SolverOptions:
    """Branch-and-bound tolerances and budget."""
    gap_tol: float = 1e-6
    feas_tol: float = 1e-6
    node_budget: int = 100_000
    tie_tol: float = 1e-9
    qp_tol: float = KKT_TOL
    refine_passes: int = 25


@dataclass
class _Relaxation:
    x: np.ndarray
    bound: float


class BranchAndBound:
    """Projection solver bound to one constraint set."""

    def __init__(self, constraint_set: ConstraintSet, options: Optional[SolverOptions] = None):
        self.cs = constraint_set
        self.opts = options or SolverOptions()
        self._logic = [
            (row.coefs, row.rhs) for group in self.cs.indicators for row in group.logic
        ]

    # ------------------------------------------------------------ public API

    def solve(self, d: np.ndarray) -> ProjectionResult:
        """Closest point of the physical set to the window ``d`` (|V| x W)."""
        cs, opts = self.cs, self.opts
        d = np.asarray(d, dtype=float)
        if d.shape != cs.lower.shape:
            raise ValueError(f"window shape {d.shape} does not match constraint set {cs.lower.shape}")
        if not np.isfinite(d).all():
            raise ValueError("window contains non-finite values")

        target = d.ravel()
        if not cs.violations(target, opts.feas_tol):
            return ProjectionResult.from_point(
                d, target, cs.binary_assignment(target, opts.feas_tol), SolveStatus.OPTIMAL, 0
            )

        self._target = target
        self._cache: Dict[Tuple[int, bytes, bytes], object] = {}

        root = self._relax({})
        if root is None:
            logger.error("Root relaxation infeasible", extra={"vitals": len(cs.vitals)})
            return ProjectionResult.from_point(d, target, (), SolveStatus.INFEASIBLE, 1)

        incumbent = self._initial_incumbent(root)
        fixed = self._probe(root, incumbent)

        counter = itertools.count()
        heap: List[tuple] = []
        start = self._relax(fixed) if fixed else root
        nodes = 0
        if start is not None:
            heapq.heappush(heap, (start.bound, self._least_completion(fixed), next(counter), fixed, start))

        while heap:
            bound, least, _, fixed, relax = heapq.heappop(heap)
            if self._prunable(bound, least, incumbent):
                continue
            if nodes >= opts.node_budget:
                logger.warning(
                    "Node budget exhausted",
                    extra={"nodes": nodes, "open": len(heap) + 1},
                )
                return self._result(d, incumbent, SolveStatus.NODE_LIMIT, nodes)
            nodes += 1

            completion, branch_on = self._complete(relax.x, fixed)
            if completion is not None:
                incumbent = self._better(incumbent, (relax.bound, completion, relax.x))
                continue
            if branch_on is None:
                continue

            for value in (0, 1):
                child = self._propagate({**fixed, branch_on: value})
                if child is None:
                    continue
                child_relax = self._relax(child)
                if child_relax is None:
                    continue
                child_least = self._least_completion(child)
                if not self._prunable(child_relax.bound, child_least, incumbent):
                    heapq.heappush(heap, (child_relax.bound, child_least, next(counter), child, child_relax))

        logger.debug(
            "Projection solved",
            extra={"nodes": nodes, "cache": len(self._cache)},
        )
        return self._result(d, incumbent, SolveStatus.OPTIMAL, nodes)

    # ------------------------------------------------------------ relaxation

    def _relax(self, fixed: Fixed) -> Optional[_Relaxation]:
        """Solve the node relaxation; None if the node is infeasible."""
        cs = self.cs
        lo, hi = cs.bounds_for(fixed)
        if (lo > hi + self.opts.feas_tol).any():
            return None
        hi = np.maximum(hi, lo)
        x = np.clip(self._target, lo, hi)
        for ci, (vars_, rows) in enumerate(cs.components):
            if rows.size == 0:
                continue
            key = (ci, lo[vars_].tobytes(), hi[vars_].tobytes())
            if key not in self._cache:
                self._cache[key] = self._solve_component(vars_, rows, lo, hi)
            sol = self._cache[key]
            if sol is None:
                return None
            x[vars_] = sol.x
        return _Relaxation(x, float(np.sum((x - self._target) ** 2)))

    def _solve_component(self, vars_, rows, lo, hi):
        args = (self._target[vars_], lo[vars_], hi[vars_], self.cs.A[np.ix_(rows, vars_)], self.cs.b[rows])
        try:
            return solve_node_qp(*args, tol=self.opts.qp_tol)
        except NodeQPError as e:
            logger.debug("Re-solving node QP with more refinement", extra={"residual": e.residual})
            return solve_node_qp(*args, tol=self.opts.qp_tol, polish_passes=self.opts.refine_passes)

    # ------------------------------------------------------------ binaries

    def _propagate(self, fixed: Fixed) -> Optional[Fixed]:
        """Unit propagation over logic rows; None when a row cannot be met."""
        fixed = dict(fixed)
        changed = True
        while changed:
            changed = False
            for coefs, rhs in self._logic:
                free = [(k, c) for k, c in coefs if k not in fixed]
                base = sum(c * fixed[k] for k, c in coefs if k in fixed)
                if base + sum(min(0.0, c) for _, c in free) > rhs + 1e-12:
                    return None
                for k, c in free:
                    others = base + sum(min(0.0, c2) for k2, c2 in free if k2 != k)
                    allowed = [v for v in (0, 1) if others + c * v <= rhs + 1e-12]
                    if len(allowed) == 1:
                        fixed[k] = allowed[0]
                        changed = True
                if changed:
                    break
        return fixed

    def _complete(self, x: np.ndarray, fixed: Fixed):
        """
        Smallest binary completion satisfied by ``x``.

        Returns (vector, None) when every group is satisfied, otherwise
        (None, first undecided binary of the first unsatisfied group).
        """
        z: Fixed = {}
        for group in self.cs.indicators:
            own = {k: fixed[k] for k in group.binaries if k in fixed}
            chosen = group.satisfying(x, self.opts.feas_tol, own)
            if chosen is None:
                free = [k for k in group.binaries if k not in fixed]
                return None, (free[0] if free else None)
            z.update(chosen)
        return tuple(z[k] for k in range(self.cs.n_binaries)), None

    def _least_completion(self, fixed: Fixed) -> Tuple[int, ...]:
        return tuple(fixed.get(k, 0) for k in range(self.cs.n_binaries))

    # ------------------------------------------------------------ incumbents

    def _better(self, current, candidate):
        if current is None:
            return candidate
        obj, z, _ = candidate
        if obj < current[0] - self.opts.tie_tol:
            return candidate
        if abs(obj - current[0]) <= self.opts.tie_tol and z < current[1]:
            return candidate
        return current

    def _prunable(self, bound: float, least: Tuple[int, ...], incumbent) -> bool:
        if incumbent is None:
            return False
        inc_obj, inc_z, _ = incumbent
        if bound <= inc_obj - self.opts.gap_tol:
            return False
        return not (bound <= inc_obj + self.opts.tie_tol and least < inc_z)

    def _assignment_point(self, fixed: Fixed):
        """Incumbent candidate with every binary fixed, or None."""
        full = self._propagate(fixed)
        if full is None or len(full) < self.cs.n_binaries:
            return None
        relax = self._relax(full)
        if relax is None:
            return None
        z, _ = self._complete(relax.x, full)
        return None if z is None else (relax.bound, z, relax.x)

    def _initial_incumbent(self, root: _Relaxation):
        """Best of the reference-point assignment and the one read off the root relaxation."""
        cs = self.cs
        candidates = []
        if cs.witness_binaries:
            candidates.append(dict(enumerate(cs.witness_binaries)))
        guided: Fixed = {}
        for group in cs.indicators:
            best = min(group.assignments(), key=lambda z: group.violation(root.x, z))
            guided.update(best)
        candidates.append(guided)

        incumbent = None
        for fixed in candidates:
            point = self._assignment_point(fixed)
            if point is not None:
                incumbent = self._better(incumbent, point)
        return incumbent

    def _probe(self, root: _Relaxation, incumbent) -> Fixed:
        """Fix binaries of groups the root violates when one branch cannot beat the incumbent."""
        if incumbent is None:
            return {}
        fixed: Fixed = {}
        for group in self.cs.indicators:
            if group.satisfying(root.x, self.opts.feas_tol) is not None:
                continue
            for k in group.binaries:
                if k in fixed:
                    continue
                bounds = {}
                for value in (0, 1):
                    child = self._propagate({**fixed, k: value})
                    relax = None if child is None else self._relax(child)
                    bounds[value] = None if relax is None else relax.bound
                for value in (0, 1):
                    other = bounds[1 - value]
                    if other is None or other > incumbent[0] + self.opts.tie_tol:
                        if bounds[value] is not None:
                            fixed = self._propagate({**fixed, k: value}) or fixed
                        break
        return fixed

    def _result(self, d: np.ndarray, incumbent, status: SolveStatus, nodes: int) -> ProjectionResult:
        if incumbent is None:
            return ProjectionResult.from_point(d, d.ravel(), (), SolveStatus.INFEASIBLE, nodes)
        _, z, x = incumbent
        return ProjectionResult.from_point(d, x, z, status, nodes)
