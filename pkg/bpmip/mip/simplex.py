# pylint: disable=line-too-long, function-name-too-long
"""
Dense bounded-variable primal simplex.

Problems are ``min/max c.x + d`` subject to ``A x <= b`` and ``lo <= x <= hi`` with finite
``lo``/``hi``. Variables are shifted to ``[0, hi - lo]``, each row receives a slack, rows with a
negative right-hand side are negated and receive an artificial variable, and the two phases run
on the same tableau. Nonbasic variables sit at either bound; entering and leaving choices follow
Bland's smallest-index rule so the method terminates on degenerate problems.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

_BASIC, _AT_LOWER, _AT_UPPER = 0, 1, 2


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


class Sense(Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


@dataclass
class LPResult:
    status: LPStatus
    value: float = float("nan")
    point: Optional[np.ndarray] = None
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == LPStatus.OPTIMAL


class _Tableau:
    """Tableau ``T = B^-1 A`` plus the current basic values."""

    def __init__(self, A: np.ndarray, rhs: np.ndarray, upper: np.ndarray, basis: np.ndarray, pivot_tol: float):
        self.A = A
        self.rhs = rhs
        self.T = A.copy()
        self.upper = upper
        self.basis = basis.copy()
        self.state = np.full(A.shape[1], _AT_LOWER, dtype=np.int8)
        self.state[basis] = _BASIC
        self.xB = rhs.copy()
        self.pivot_tol = pivot_tol
        self.iterations = 0

    def values(self) -> np.ndarray:
        x = np.where(self.state == _AT_UPPER, self.upper, 0.0)
        x[self.basis] = self.xB
        return x

    def refresh(self):
        """Recompute ``T`` and the basic values from the original rows."""
        B = self.A[:, self.basis]
        nonbasic = np.where(self.state == _AT_UPPER, self.upper, 0.0)
        nonbasic[self.basis] = 0.0
        try:
            self.T = np.linalg.solve(B, self.A)
            self.xB = np.linalg.solve(B, self.rhs - self.A @ nonbasic)
        except np.linalg.LinAlgError:
            logger.debug("basis matrix singular during refresh; keeping incremental tableau")

    def run(self, cost: np.ndarray, enterable: np.ndarray, max_iter: int) -> LPStatus:
        tol = self.pivot_tol
        m = self.T.shape[0]
        while self.iterations < max_iter:
            reduced = cost - cost[self.basis] @ self.T
            entering = -1
            for j in np.flatnonzero(enterable):
                state = self.state[j]
                if state == _AT_LOWER and reduced[j] < -tol and self.upper[j] > 0.0:
                    entering = j
                    break
                if state == _AT_UPPER and reduced[j] > tol:
                    entering = j
                    break
            if entering < 0:
                return LPStatus.OPTIMAL
            self.iterations += 1

            direction = 1.0 if self.state[entering] == _AT_LOWER else -1.0
            column = direction * self.T[:, entering]
            step = self.upper[entering]
            leave_row, leave_to = -1, _AT_LOWER
            for i in range(m):
                rate = column[i]
                if rate > tol:
                    ratio, target = self.xB[i] / rate, _AT_LOWER
                elif rate < -tol and np.isfinite(self.upper[self.basis[i]]):
                    ratio, target = (self.upper[self.basis[i]] - self.xB[i]) / -rate, _AT_UPPER
                else:
                    continue
                ratio = max(ratio, 0.0)
                if (ratio < step - tol
                        or (leave_row >= 0 and abs(ratio - step) <= tol and self.basis[i] < self.basis[leave_row])
                        or (leave_row < 0 and abs(ratio - step) <= tol and self.basis[i] < entering)):
                    step, leave_row, leave_to = ratio, i, target
            if not np.isfinite(step):
                return LPStatus.UNBOUNDED

            self.xB -= step * column
            if leave_row < 0:
                # bound flip, basis unchanged
                self.state[entering] = _AT_UPPER if direction > 0 else _AT_LOWER
                continue

            entering_value = step if direction > 0 else self.upper[entering] - step
            leaving = self.basis[leave_row]
            self.state[leaving] = leave_to
            self.state[entering] = _BASIC
            self.basis[leave_row] = entering
            self.xB[leave_row] = entering_value

            pivot = self.T[leave_row, entering]
            self.T[leave_row] /= pivot
            factors = self.T[:, entering].copy()
            factors[leave_row] = 0.0
            self.T -= np.outer(factors, self.T[leave_row])
        return LPStatus.ITERATION_LIMIT


def solve_lp(objective: Sequence[float], constant: float,
             A_ub: Optional[np.ndarray], b_ub: Optional[Sequence[float]],
             lower: Sequence[float], upper: Sequence[float],
             sense: Sense = Sense.MINIMIZE,
             pivot_tol: float = 1e-9, feasibility_tol: float = 1e-7,
             max_iter: Optional[int] = None) -> LPResult:
    """Optimize ``objective . x + constant`` over ``A_ub x <= b_ub``, ``lower <= x <= upper``."""
    c = np.asarray(objective, dtype=np.float64).reshape(-1)
    lo = np.asarray(lower, dtype=np.float64).reshape(-1)
    hi = np.asarray(upper, dtype=np.float64).reshape(-1)
    n = c.shape[0]
    if lo.shape[0] != n or hi.shape[0] != n:
        raise ValueError("objective and bound vectors differ in length")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("variable bounds must be finite")
    if np.any(lo > hi + feasibility_tol):
        return LPResult(LPStatus.INFEASIBLE)
    hi = np.maximum(hi, lo)
    if A_ub is None or len(A_ub) == 0:
        A = np.zeros((0, n))
        b = np.zeros(0)
    else:
        A = np.asarray(A_ub, dtype=np.float64).reshape(-1, n)
        b = np.asarray(b_ub, dtype=np.float64).reshape(-1)

    minimize_c = c if sense == Sense.MINIMIZE else -c
    if A.shape[0] == 0:
        x = np.where(minimize_c >= 0, lo, hi)
        return LPResult(LPStatus.OPTIMAL, float(c @ x + constant), x, 0)

    m = A.shape[0]
    width = hi - lo
    rhs = b - A @ lo
    flip = rhs < 0
    sign = np.where(flip, -1.0, 1.0)
    n_art = int(flip.sum())
    total = n + m + n_art
    full = np.zeros((m, total))
    full[:, :n] = A * sign[:, None]
    full[np.arange(m), n + np.arange(m)] = sign
    art_rows = np.flatnonzero(flip)
    full[art_rows, n + m + np.arange(n_art)] = 1.0
    rhs = rhs * sign
    bounds = np.concatenate([width, np.full(m, np.inf), np.full(n_art, np.inf)])
    basis = n + np.arange(m)
    basis[art_rows] = n + m + np.arange(n_art)

    limit = max_iter if max_iter is not None else 50 * (total + m) + 1000
    tableau = _Tableau(full, rhs, bounds, basis, pivot_tol)

    if n_art:
        phase_one = np.zeros(total)
        phase_one[n + m:] = 1.0
        status = tableau.run(phase_one, np.ones(total, dtype=bool), limit)
        if status == LPStatus.ITERATION_LIMIT:
            logger.warning("simplex phase one hit the iteration limit (%d)", limit)
            return LPResult(status, iterations=tableau.iterations)
        tableau.refresh()
        infeasibility = float(tableau.values()[n + m:].sum())
        if infeasibility > feasibility_tol * max(1.0, float(np.abs(rhs).max())):
            return LPResult(LPStatus.INFEASIBLE, iterations=tableau.iterations)
        # artificials stay pinned at zero
        tableau.upper[n + m:] = 0.0

    cost = np.zeros(total)
    cost[:n] = minimize_c
    enterable = np.ones(total, dtype=bool)
    enterable[n + m:] = False
    status = tableau.run(cost, enterable, limit)
    if status != LPStatus.OPTIMAL:
        if status == LPStatus.ITERATION_LIMIT:
            logger.warning("simplex phase two hit the iteration limit (%d)", limit)
        return LPResult(status, iterations=tableau.iterations)
    tableau.refresh()
    x = lo + np.clip(tableau.values()[:n], 0.0, width)
    return LPResult(LPStatus.OPTIMAL, float(c @ x + constant), x, tableau.iterations)


def box_extremes(coeffs: np.ndarray, const: float, lower: np.ndarray, upper: np.ndarray) -> Tuple[float, float]:
    """Exact min and max of an affine function over a box."""
    pos = np.maximum(coeffs, 0.0)
    neg = np.minimum(coeffs, 0.0)
    lo = float(pos @ lower + neg @ upper + const)
    hi = float(pos @ upper + neg @ lower + const)
    return lo, hi
