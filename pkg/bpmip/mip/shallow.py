# pylint: disable=line-too-long, function-name-too-long
"""
Exact optimization of shallow ReLU objectives

    c . v + d + sum_j w_j * ReLU(a_j . v + b_j),    v in [box_lower, box_upper]

by branch-and-bound over ReLU phases. A node fixes some terms Active (term = a_j.v + b_j,
with a_j.v + b_j >= 0) or Inactive (term = 0, with a_j.v + b_j <= 0) and relaxes the rest by
their triangle hull over the interval of a_j.v + b_j on the box. Node LPs go to ``solve_lp``.
"""

import heapq
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .simplex import LPStatus, Sense, box_extremes, solve_lp

logger = logging.getLogger(__name__)


class OptStatus(Enum):
    OPTIMAL = "optimal"
    BUDGET_EXHAUSTED = "budget_exhausted"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class ReluTerm:
    weight: float
    coeffs: np.ndarray
    const: float

    def value(self, v: np.ndarray) -> float:
        return self.weight * max(float(self.coeffs @ v) + self.const, 0.0)


@dataclass(frozen=True, eq=False)
class ShallowReluProblem:
    box_lower: np.ndarray
    box_upper: np.ndarray
    linear_coeffs: np.ndarray
    constant: float = 0.0
    relu_terms: Tuple[ReluTerm, ...] = ()
    sense: Sense = Sense.MINIMIZE

    @classmethod
    def build(cls, box_lower: Sequence[float], box_upper: Sequence[float], linear_coeffs: Sequence[float],
              constant: float = 0.0, relu_terms: Sequence[Tuple[float, Sequence[float], float]] = (),
              sense: Sense = Sense.MINIMIZE) -> "ShallowReluProblem":
        """Normalize inputs: terms with zero weight are dropped, terms with ``a_j = 0`` fold into the constant."""
        lower = np.asarray(box_lower, dtype=np.float64).reshape(-1)
        upper = np.asarray(box_upper, dtype=np.float64).reshape(-1)
        if lower.shape != upper.shape:
            raise ValueError("box bounds differ in length")
        if np.any(lower > upper):
            raise ValueError("box lower exceeds upper")
        linear = np.asarray(linear_coeffs, dtype=np.float64).reshape(-1)
        if linear.shape != lower.shape:
            raise ValueError(f"linear_coeffs has length {linear.shape[0]}, box has {lower.shape[0]}")
        terms = []
        for weight, coeffs, const in relu_terms:
            coeffs = np.asarray(coeffs, dtype=np.float64).reshape(-1)
            if coeffs.shape != lower.shape:
                raise ValueError("relu term coefficients do not match the box")
            if weight == 0.0:
                continue
            if not np.any(coeffs):
                constant += weight * max(const, 0.0)
                continue
            terms.append(ReluTerm(float(weight), coeffs, float(const)))
        return cls(lower, upper, linear, float(constant), tuple(terms), sense)

    @property
    def n_vars(self) -> int:
        return self.box_lower.shape[0]

    def evaluate(self, v: Sequence[float]) -> float:
        v = np.asarray(v, dtype=np.float64)
        return float(self.linear_coeffs @ v) + self.constant + sum(term.value(v) for term in self.relu_terms)

    def term_intervals(self) -> np.ndarray:
        """Interval ``[L_j, U_j]`` of every term argument over the box, shape ``(m, 2)``."""
        return np.array([box_extremes(t.coeffs, t.const, self.box_lower, self.box_upper) for t in self.relu_terms]
                        ).reshape(-1, 2)

    def negated(self) -> "ShallowReluProblem":
        flipped = Sense.MAXIMIZE if self.sense == Sense.MINIMIZE else Sense.MINIMIZE
        terms = tuple(ReluTerm(-t.weight, t.coeffs, t.const) for t in self.relu_terms)
        return ShallowReluProblem(self.box_lower, self.box_upper, -self.linear_coeffs, -self.constant, terms, flipped)


@dataclass
class OptResult:
    certified_bound: float
    incumbent_value: float
    incumbent_point: Optional[np.ndarray]
    status: OptStatus
    nodes_explored: int = 0
    relaxation_value: float = float("nan")

    @property
    def gap(self) -> float:
        return abs(self.incumbent_value - self.certified_bound)


@dataclass(order=True)
class _Node:
    bound: float
    order: int
    phases: Tuple[int, ...] = field(compare=False)
    point: Optional[np.ndarray] = field(compare=False, default=None)


# phase codes
_FREE, _ACTIVE, _INACTIVE = 0, 1, -1


class _NodeLP:
    """Builds and solves the LP relaxation of a node of a minimization problem.

    A node's region is the box cut by the constraints of its fixed phases. Free terms are
    relaxed over their argument interval on that region, not on the whole box.
    """

    def __init__(self, problem: ShallowReluProblem, intervals: np.ndarray, pivot_tol: float):
        self.problem = problem
        self.intervals = intervals
        self.pivot_tol = pivot_tol

    def _phase_rows(self, phases: Sequence[int]) -> Tuple[List[np.ndarray], List[float]]:
        rows, rhs = [], []
        for j, phase in enumerate(phases):
            term = self.problem.relu_terms[j]
            if phase == _ACTIVE:
                rows.append(-term.coeffs)
                rhs.append(term.const)
            elif phase == _INACTIVE:
                rows.append(term.coeffs.copy())
                rhs.append(-term.const)
        return rows, rhs

    def node_intervals(self, phases: Sequence[int]) -> Optional[np.ndarray]:
        """Argument interval of every term over the node's region; None when the region is empty."""
        p = self.problem
        intervals = self.intervals.copy()
        rows, rhs = self._phase_rows(phases)
        if not rows:
            return intervals
        A = np.array(rows)
        for j, phase in enumerate(phases):
            if phase != _FREE:
                continue
            term = p.relu_terms[j]
            low = solve_lp(term.coeffs, term.const, A, rhs, p.box_lower, p.box_upper, Sense.MINIMIZE,
                           pivot_tol=self.pivot_tol)
            if low.status == LPStatus.INFEASIBLE:
                return None
            high = solve_lp(term.coeffs, term.const, A, rhs, p.box_lower, p.box_upper, Sense.MAXIMIZE,
                            pivot_tol=self.pivot_tol)
            # a failed interval LP keeps the box interval
            if low.is_optimal:
                intervals[j, 0] = max(intervals[j, 0], low.value)
            if high.is_optimal:
                intervals[j, 1] = max(min(intervals[j, 1], high.value), intervals[j, 0])
        return intervals

    def solve(self, phases: Sequence[int]) -> Tuple[float, Optional[np.ndarray], Tuple[int, ...]]:
        """Relaxation value, LP point and phases with the one-signed terms of the region fixed."""
        p = self.problem
        n = p.n_vars
        intervals = self.node_intervals(phases)
        if intervals is None:
            return float("inf"), None, tuple(phases)
        phases = list(phases)
        for j, phase in enumerate(phases):
            if phase == _FREE:
                if intervals[j, 0] >= 0.0:
                    phases[j] = _ACTIVE
                elif intervals[j, 1] <= 0.0:
                    phases[j] = _INACTIVE
        free = [j for j, phase in enumerate(phases) if phase == _FREE]
        size = n + len(free)
        c = np.zeros(size)
        c[:n] = p.linear_coeffs
        const = p.constant
        lower = np.concatenate([p.box_lower, np.zeros(len(free))])
        upper = np.concatenate([p.box_upper, np.zeros(len(free))])
        rows, rhs = [], []
        phase_rows, phase_rhs = self._phase_rows(phases)
        for row_v, value in zip(phase_rows, phase_rhs):
            row = np.zeros(size)
            row[:n] = row_v
            rows.append(row)
            rhs.append(value)
        for j, phase in enumerate(phases):
            if phase == _ACTIVE:
                term = p.relu_terms[j]
                c[:n] += term.weight * term.coeffs
                const += term.weight * term.const
        for k, j in enumerate(free):
            term = p.relu_terms[j]
            low, high = intervals[j]
            aux = n + k
            c[aux] = term.weight
            upper[aux] = high
            # t >= a.v + b
            row = np.zeros(size)
            row[:n] = term.coeffs
            row[aux] = -1.0
            rows.append(row)
            rhs.append(-term.const)
            # t <= U (a.v + b - L) / (U - L)
            slope = high / (high - low)
            row = np.zeros(size)
            row[:n] = -slope * term.coeffs
            row[aux] = 1.0
            rows.append(row)
            rhs.append(slope * (term.const - low))
        A = np.array(rows) if rows else None
        result = solve_lp(c, const, A, rhs, lower, upper, Sense.MINIMIZE, pivot_tol=self.pivot_tol)
        if result.status == LPStatus.INFEASIBLE:
            return float("inf"), None, tuple(phases)
        if not result.is_optimal:
            # no usable relaxation value: fall back to the trivial interval bound of the node
            return self._interval_bound(phases, intervals), None, tuple(phases)
        return result.value, result.point[:n], tuple(phases)

    def _interval_bound(self, phases: Sequence[int], intervals: np.ndarray) -> float:
        p = self.problem
        low, _ = box_extremes(p.linear_coeffs, p.constant, p.box_lower, p.box_upper)
        for j, term in enumerate(p.relu_terms):
            t_low, t_high = intervals[j]
            if phases[j] == _INACTIVE:
                continue
            if phases[j] == _ACTIVE:
                t_low = max(t_low, 0.0)
            lo_val = max(t_low, 0.0)
            hi_val = max(t_high, 0.0)
            low += min(term.weight * lo_val, term.weight * hi_val)
        return low


def _branch_order(problem: ShallowReluProblem, intervals: np.ndarray) -> List[int]:
    scores = [abs(t.weight) * min(intervals[j, 1], -intervals[j, 0]) for j, t in enumerate(problem.relu_terms)]
    return sorted(range(len(scores)), key=lambda j: (-scores[j], j))


def solve_shallow(problem: ShallowReluProblem, budget_ms: Optional[float] = None,
                  gap_tol: float = 1e-8, pivot_tol: float = 1e-9, node_limit: int = 100000) -> OptResult:
    """Branch-and-bound to the global optimum, or a certified bound when the budget runs out."""
    if problem.sense == Sense.MAXIMIZE:
        inner = solve_shallow(problem.negated(), budget_ms, gap_tol, pivot_tol, node_limit)
        return OptResult(-inner.certified_bound, -inner.incumbent_value, inner.incumbent_point, inner.status,
                         inner.nodes_explored, -inner.relaxation_value)

    deadline = None if budget_ms is None else time.monotonic() + budget_ms / 1000.0
    intervals = problem.term_intervals()
    phases = []
    for low, high in intervals:
        if low >= 0.0:
            phases.append(_ACTIVE)
        elif high <= 0.0:
            phases.append(_INACTIVE)
        else:
            phases.append(_FREE)
    order = [j for j in _branch_order(problem, intervals) if phases[j] == _FREE]
    node_lp = _NodeLP(problem, intervals, pivot_tol)

    best_value, best_point = float("inf"), None

    def consider(point):
        nonlocal best_value, best_point
        if point is None:
            return
        value = problem.evaluate(point)
        if value < best_value:
            best_value, best_point = value, point

    counter = 0
    root_bound, root_point, root_phases = node_lp.solve(phases)
    consider(root_point)
    if best_point is None:
        consider(np.clip((problem.box_lower + problem.box_upper) / 2.0, problem.box_lower, problem.box_upper))
    queue = [_Node(root_bound, counter, root_phases, root_point)]
    explored = 0
    status = OptStatus.OPTIMAL
    # lowest bound of leaves whose LP did not solve; their regions stay unexplored
    unresolved = float("inf")

    while queue:
        node = queue[0]
        if node.bound >= best_value - gap_tol * max(1.0, abs(best_value)):
            break
        if explored >= node_limit or (deadline is not None and time.monotonic() > deadline):
            status = OptStatus.BUDGET_EXHAUSTED
            break
        heapq.heappop(queue)
        explored += 1
        branch = next((j for j in order if node.phases[j] == _FREE), None)
        if branch is None:
            if node.point is None:
                unresolved = min(unresolved, node.bound)
            # otherwise the leaf LP is exact
            continue
        for phase in (_ACTIVE, _INACTIVE):
            child = list(node.phases)
            child[branch] = phase
            bound, point, child_phases = node_lp.solve(child)
            # a child's relaxation is contained in its parent's
            bound = max(bound, node.bound)
            if point is None and bound == float("inf"):
                continue
            consider(point)
            counter += 1
            heapq.heappush(queue, _Node(bound, counter, child_phases, point))

    open_bound = queue[0].bound if queue else float("inf")
    certified = min(best_value, open_bound, unresolved)
    if unresolved < best_value - gap_tol * max(1.0, abs(best_value)):
        logger.warning("a leaf LP did not solve; the bound falls back to its interval relaxation (%.6g)", unresolved)
        status = OptStatus.BUDGET_EXHAUSTED
    if best_point is None:
        return OptResult(float("inf"), float("inf"), None, OptStatus.INFEASIBLE, explored, root_bound)
    if status == OptStatus.BUDGET_EXHAUSTED:
        logger.info("shallow solve stopped after %d nodes with gap %.3g", explored, best_value - certified)
    return OptResult(certified, best_value, best_point, status, explored, root_bound)
