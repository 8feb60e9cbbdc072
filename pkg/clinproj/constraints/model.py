"""
Solver-ready constraint sets over one window.

Variables are the solve-space values of a |V| x W window, flattened
vital-major: index(v, t) = v * W + t. Binary indicators are numbered
globally across all groups of the set.
"""

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

Coefs = Tuple[Tuple[int, float], ...]


@dataclass(frozen=True)
class RateRow:
    """|x[v, t] - x[v, t-1]| <= bound."""
    vital: int
    t: int
    bound: float


@dataclass(frozen=True)
class LinearRow:
    """sum(coef * x[j]) <= rhs."""
    coefs: Coefs
    rhs: float
    label: str


@dataclass(frozen=True)
class BigMRow:
    """x[var] <= (or >=) const + sum(coef * z[k])."""
    var: int
    sense: str
    const: float
    coefs: Coefs

    def bound(self, z: Dict[int, int]) -> float:
        return self.const + sum(c * z[k] for k, c in self.coefs)


@dataclass(frozen=True)
class LogicRow:
    """sum(coef * z[k]) <= rhs."""
    coefs: Coefs
    rhs: float


@dataclass(frozen=True)
class IndicatorGroup:
    """Binaries of one implication constraint at one time step."""
    label: str
    t: int
    binaries: Tuple[int, ...]
    rows: Tuple[BigMRow, ...]
    logic: Tuple[LogicRow, ...] = ()

    def assignments(self, fixed: Optional[Dict[int, int]] = None) -> Iterator[Dict[int, int]]:
        """Completions of ``fixed`` over this group, lexicographic order, logic-feasible only."""
        fixed = fixed or {}
        free = [k for k in self.binaries if k not in fixed]
        for values in itertools.product((0, 1), repeat=len(free)):
            z = {k: fixed[k] for k in self.binaries if k in fixed}
            z.update(zip(free, values))
            if all(sum(c * z[k] for k, c in row.coefs) <= row.rhs for row in self.logic):
                yield z

    def violation(self, x: np.ndarray, z: Dict[int, int]) -> float:
        """Largest big-M row violation of ``x`` under assignment ``z``."""
        worst = 0.0
        for row in self.rows:
            b = row.bound(z)
            excess = x[row.var] - b if row.sense == "le" else b - x[row.var]
            worst = max(worst, excess)
        return worst

    def satisfying(self, x: np.ndarray, tol: float, fixed: Optional[Dict[int, int]] = None):
        """First (lexicographically smallest) assignment satisfied by ``x``, or None."""
        for z in self.assignments(fixed):
            if self.violation(x, z) <= tol:
                return z
        return None


@dataclass(frozen=True)
class Violation:
    """One violated row; ``slack`` is negative by the violated amount."""
    kind: str
    label: str
    slack: float
    vital: Optional[str] = None
    t: Optional[int] = None


@dataclass(eq=False)
class ConstraintSet:
    """
    Box, rate, affine and indicator constraints for one window length.

    Treated as immutable once built; the compiled affine matrix and the
    variable components are derived eagerly so the set can be shared across
    worker processes.
    """
    vitals: Tuple[str, ...]
    window_len: int
    lower: np.ndarray
    upper: np.ndarray
    rates: Tuple[RateRow, ...] = ()
    linear: Tuple[LinearRow, ...] = ()
    indicators: Tuple[IndicatorGroup, ...] = ()
    binary_names: Tuple[str, ...] = ()
    witness: Optional[np.ndarray] = None
    witness_binaries: Tuple[int, ...] = ()
    A: np.ndarray = field(init=False, repr=False)
    b: np.ndarray = field(init=False, repr=False)
    row_labels: Tuple[str, ...] = field(init=False, repr=False)
    components: Tuple[Tuple[np.ndarray, np.ndarray], ...] = field(init=False, repr=False)

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float).reshape(len(self.vitals), self.window_len)
        self.upper = np.asarray(self.upper, dtype=float).reshape(len(self.vitals), self.window_len)
        self._compile()

    # ------------------------------------------------------------------ layout

    @property
    def n_vars(self) -> int:
        return len(self.vitals) * self.window_len

    @property
    def n_binaries(self) -> int:
        return len(self.binary_names)

    def index(self, v: int, t: int) -> int:
        return v * self.window_len + t

    def locate(self, j: int) -> Tuple[str, int]:
        v, t = divmod(j, self.window_len)
        return self.vitals[v], t

    def free_vitals(self) -> List[str]:
        """Vitals touched by no rate, affine or indicator row."""
        used = {r.vital for r in self.rates}
        for row in self.linear:
            used.update(j // self.window_len for j, _ in row.coefs)
        for group in self.indicators:
            used.update(r.var // self.window_len for r in group.rows)
        return [name for v, name in enumerate(self.vitals) if v not in used]

    # --------------------------------------------------------------- compiling

    def _compile(self) -> None:
        n = self.n_vars
        rows: List[np.ndarray] = []
        rhs: List[float] = []
        labels: List[str] = []
        for r in self.rates:
            a = np.zeros(n)
            a[self.index(r.vital, r.t)] = 1.0
            a[self.index(r.vital, r.t - 1)] = -1.0
            name = f"rate:{self.vitals[r.vital]}@{r.t}"
            rows.extend([a, -a])
            rhs.extend([r.bound, r.bound])
            labels.extend([f"{name}:up", f"{name}:down"])
        for row in self.linear:
            a = np.zeros(n)
            for j, c in row.coefs:
                a[j] += c
            rows.append(a)
            rhs.append(row.rhs)
            labels.append(row.label)
        self.A = np.vstack(rows) if rows else np.zeros((0, n))
        self.b = np.asarray(rhs, dtype=float)
        self.row_labels = tuple(labels)
        self.components = self._find_components()

    def _find_components(self) -> Tuple[Tuple[np.ndarray, np.ndarray], ...]:
        """Groups of variables coupled through affine rows, with their rows."""
        parent = list(range(self.n_vars))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a in self.A:
            nz = np.flatnonzero(a)
            for j in nz[1:]:
                ri, rj = find(int(nz[0])), find(int(j))
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

        members: Dict[int, List[int]] = {}
        for j in range(self.n_vars):
            members.setdefault(find(j), []).append(j)
        row_owner: Dict[int, List[int]] = {}
        for i, a in enumerate(self.A):
            nz = np.flatnonzero(a)
            if len(nz):
                row_owner.setdefault(find(int(nz[0])), []).append(i)
        return tuple(
            (np.asarray(vars_, dtype=int), np.asarray(row_owner.get(root, []), dtype=int))
            for root, vars_ in sorted(members.items())
        )

    # ------------------------------------------------------------- evaluation

    def bounds_for(self, fixed: Dict[int, int]) -> Tuple[np.ndarray, np.ndarray]:
        """Flattened box tightened by every big-M row whose binaries are all fixed."""
        lo = self.lower.ravel().copy()
        hi = self.upper.ravel().copy()
        for group in self.indicators:
            for row in group.rows:
                if all(k in fixed for k, _ in row.coefs):
                    bound = row.bound(fixed)
                    if row.sense == "le":
                        hi[row.var] = min(hi[row.var], bound)
                    else:
                        lo[row.var] = max(lo[row.var], bound)
        return lo, hi

    def logic_feasible(self, fixed: Dict[int, int]) -> bool:
        """True when every logic row can still be met by some completion of ``fixed``."""
        for group in self.indicators:
            for row in group.logic:
                least = sum(
                    c * fixed[k] if k in fixed else min(0.0, c) for k, c in row.coefs
                )
                if least > row.rhs + 1e-12:
                    return False
        return True

    def violations(self, x: np.ndarray, tol: float = 1e-6) -> List[Violation]:
        """Every row violated by more than ``tol`` at point ``x``."""
        x = np.asarray(x, dtype=float).ravel()
        found: List[Violation] = []
        lo, hi = self.lower.ravel(), self.upper.ravel()
        for j in np.flatnonzero((x < lo - tol) | (x > hi + tol)):
            vital, t = self.locate(int(j))
            slack = min(x[j] - lo[j], hi[j] - x[j])
            found.append(Violation("box", f"box:{vital}@{t}", float(slack), vital, t))
        if len(self.b):
            slack = self.b - self.A @ x
            for i in np.flatnonzero(slack < -tol):
                kind = "rate" if self.row_labels[i].startswith("rate:") else "linear"
                found.append(Violation(kind, self.row_labels[i], float(slack[i])))
        for group in self.indicators:
            best = min(group.violation(x, z) for z in group.assignments())
            if best > tol:
                found.append(Violation("indicator", group.label, -float(best), t=group.t))
        return found

    def binary_assignment(self, x: np.ndarray, tol: float = 1e-6) -> Optional[Tuple[int, ...]]:
        """Lexicographically smallest binary vector satisfied by ``x``, or None."""
        x = np.asarray(x, dtype=float).ravel()
        z: Dict[int, int] = {}
        for group in self.indicators:
            chosen = group.satisfying(x, tol)
            if chosen is None:
                return None
            z.update(chosen)
        return tuple(z[k] for k in range(self.n_binaries))
