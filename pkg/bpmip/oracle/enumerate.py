# pylint: disable=line-too-long, function-name-too-long
"""
Exact optimization by phase enumeration.

Every consistent assignment of Active / Inactive phases to the unstable ReLUs turns the problem
into one LP. Assignments are built one neuron at a time and a prefix whose constraints are
already infeasible is not extended, which visits the same leaves as full enumeration.
"""

import logging
import math
from typing import List, Tuple

import numpy as np

from ..engine.bounds import interval_propagate
from ..errors import DimensionError, OracleCapError
from ..mip.shallow import ShallowReluProblem
from ..mip.simplex import LPStatus, Sense, solve_lp
from ..network.model import BoxDomain, Network

logger = logging.getLogger(__name__)

MAX_UNSTABLE_RELUS = 20


def _feasible(rows: List[np.ndarray], rhs: List[float], lower: np.ndarray, upper: np.ndarray) -> bool:
    result = solve_lp(np.zeros(lower.shape[0]), 0.0, np.array(rows), rhs, lower, upper)
    return result.status != LPStatus.INFEASIBLE


def enumerate_shallow(problem: ShallowReluProblem, cap: int = MAX_UNSTABLE_RELUS) -> float:
    """True optimum of a shallow ReLU problem (min or max according to ``problem.sense``)."""
    intervals = problem.term_intervals()
    terms = problem.relu_terms
    unstable = [j for j, (low, high) in enumerate(intervals) if low < 0.0 < high]
    if len(unstable) > cap:
        raise OracleCapError(f"{len(unstable)} unstable ReLU terms exceed the enumeration cap of {cap}")

    coeffs = problem.linear_coeffs.copy()
    constant = problem.constant
    for j, (low, _) in enumerate(intervals):
        if low >= 0.0:
            coeffs = coeffs + terms[j].weight * terms[j].coeffs
            constant += terms[j].weight * terms[j].const

    maximize = problem.sense == Sense.MAXIMIZE
    best = -math.inf if maximize else math.inf
    lower, upper = problem.box_lower, problem.box_upper

    def visit(k: int, rows: List[np.ndarray], rhs: List[float], c: np.ndarray, d: float):
        nonlocal best
        if k == len(unstable):
            result = solve_lp(c, d, np.array(rows) if rows else None, rhs, lower, upper, problem.sense)
            if result.is_optimal:
                best = max(best, result.value) if maximize else min(best, result.value)
            elif result.status != LPStatus.INFEASIBLE:
                logger.warning("pattern LP ended with status %s", result.status.value)
            return
        if rows and not _feasible(rows, rhs, lower, upper):
            return
        term = terms[unstable[k]]
        visit(k + 1, rows + [-term.coeffs], rhs + [term.const], c + term.weight * term.coeffs, d + term.weight * term.const)
        visit(k + 1, rows + [term.coeffs], rhs + [-term.const], c, d)

    visit(0, [], [], coeffs, constant)
    return best


def enumerate_network_extremes(net: Network, dom: BoxDomain, out_index: int = 0,
                               cap: int = MAX_UNSTABLE_RELUS) -> Tuple[float, float]:
    """Exact ``(min, max)`` of output ``out_index`` over ``dom``."""
    if dom.dim != net.input_dim:
        raise DimensionError(f"domain has {dom.dim} coordinates, network expects {net.input_dim}")
    if not 0 <= out_index < net.output_dim:
        raise DimensionError(f"output index {out_index} out of range for {net.output_dim} outputs")
    bounds = interval_propagate(net, dom)
    unstable = bounds.unstable_count(net)
    if unstable > cap:
        raise OracleCapError(f"{unstable} unstable ReLUs exceed the enumeration cap of {cap}")

    lower, upper = dom.lower, dom.upper
    extremes = [math.inf, -math.inf]

    def leaf(A: np.ndarray, c: np.ndarray, rows: List[np.ndarray], rhs: List[float]):
        table = np.array(rows) if rows else None
        low = solve_lp(A[out_index], c[out_index], table, rhs, lower, upper, Sense.MINIMIZE)
        high = solve_lp(A[out_index], c[out_index], table, rhs, lower, upper, Sense.MAXIMIZE)
        for result in (low, high):
            if not result.is_optimal and result.status != LPStatus.INFEASIBLE:
                logger.warning("pattern LP ended with status %s", result.status.value)
        if low.is_optimal:
            extremes[0] = min(extremes[0], low.value)
        if high.is_optimal:
            extremes[1] = max(extremes[1], high.value)

    def descend(i: int, A: np.ndarray, c: np.ndarray, rows: List[np.ndarray], rhs: List[float]):
        # y^{i-1} = A x^0 + c on the current region
        layer = net.affine(i)
        pre_A = layer.weights @ A
        pre_c = layer.weights @ c + layer.bias
        if i == net.depth:
            leaf(pre_A, pre_c, rows, rhs)
            return
        assign(i, 0, pre_A, pre_c, np.ones(layer.out_dim), rows, rhs)

    def assign(i: int, j: int, pre_A: np.ndarray, pre_c: np.ndarray, mask: np.ndarray,
               rows: List[np.ndarray], rhs: List[float]):
        low, high = bounds.pre(i)
        width = pre_A.shape[0]
        while j < width and not low[j] < 0.0 < high[j]:
            mask[j] = 1.0 if low[j] >= 0.0 else 0.0
            j += 1
        if j == width:
            descend(i + 1, pre_A * mask[:, None], pre_c * mask, rows, rhs)
            return
        for active in (True, False):
            row, bound = (-pre_A[j], pre_c[j]) if active else (pre_A[j], -pre_c[j])
            child_rows, child_rhs = rows + [row], rhs + [float(bound)]
            if not _feasible(child_rows, child_rhs, lower, upper):
                continue
            child_mask = mask.copy()
            child_mask[j] = 1.0 if active else 0.0
            assign(i, j + 1, pre_A, pre_c, child_mask, child_rows, child_rhs)

    descend(1, np.eye(net.input_dim), np.zeros(net.input_dim), [], [])
    return extremes[0], extremes[1]


def count_unstable(net: Network, dom: BoxDomain) -> int:
    return interval_propagate(net, dom).unstable_count(net)

