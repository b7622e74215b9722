# pylint: disable=line-too-long, function-name-too-long
"""
Error terms of back-substitution.

Relaxing the ReLUs of layer ``t`` in a form ``omega . y^t + c`` over-approximates (Upper side)
or under-approximates (Lower side) the form by

    E^t(y^{t-1}) = sum_j omega_j * (s_j * x^t_j + d_j - ReLU(x^t_j)),   x^t = W y^{t-1} + b

which is one ReLU deep in ``y^{t-1}`` and therefore a shallow ReLU problem over the box of
``y^{t-1}``. Subtracting a certified ``min E^t`` (Upper) or ``max E^t`` (Lower) from the running
bound keeps it sound and removes a detached bias.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..engine.bounds import LayerBounds
from ..engine.relaxation import ReluRelaxation, Side
from ..engine.symbolic import SymbolicLinearForm
from ..errors import MissingBoundsError
from ..mip.shallow import OptResult, OptStatus, ShallowReluProblem, solve_shallow
from ..mip.simplex import Sense
from ..network.model import Network

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ErrorTerm:
    layer_index: int
    side: Side
    outer_coeffs: np.ndarray
    relaxation: ReluRelaxation
    as_problem: ShallowReluProblem

    def evaluate(self, previous_post: np.ndarray) -> float:
        """Value of the error at the post-activations of layer ``t - 1``."""
        return self.as_problem.evaluate(previous_post)


@dataclass
class ErrorMinimum:
    """Bound on the error to subtract from the running candidate, plus the solver outcome."""
    value: float
    result: Optional[OptResult] = None

    @property
    def exhausted(self) -> bool:
        return self.result is not None and self.result.status != OptStatus.OPTIMAL


def assemble_error_term(form: SymbolicLinearForm, net: Network, bounds: LayerBounds,
                        relaxation: ReluRelaxation, side: Side) -> ErrorTerm:
    """Error of relaxing layer ``t = form.layer_index`` with ``relaxation``, over the box of ``y^{t-1}``."""
    t = form.layer_index
    if bounds.num_layers <= t:
        raise MissingBoundsError(f"bounds for layer {t} are needed to assemble its error term")
    layer = net.affine(t)
    box_lower, box_upper = bounds.post(t - 1)
    omega = form.coeffs
    scaled = omega * relaxation.slope
    linear = scaled @ layer.weights
    constant = float(scaled @ layer.bias) + float(omega @ relaxation.intercept)
    terms = [(-float(omega[j]), layer.weights[j], float(layer.bias[j])) for j in range(omega.shape[0])]
    sense = Sense.MINIMIZE if side == Side.UPPER else Sense.MAXIMIZE
    problem = ShallowReluProblem.build(box_lower, box_upper, linear, constant, terms, sense)
    return ErrorTerm(t, side, omega.copy(), relaxation, problem)


def minimize_error(term: ErrorTerm, budget_ms: Optional[float] = None, gap_tol: float = 1e-8,
                   pivot_tol: float = 1e-9, node_limit: int = 100000) -> ErrorMinimum:
    """Certified amount to subtract: ``max(0, min E)`` for Upper terms, ``min(0, max E)`` for Lower ones.

    The error is non-negative (non-positive) on the reachable set, so clamping at zero stays sound
    even though the box of ``y^{t-1}`` may contain unreachable points. An exhausted budget still
    yields the solver's certified bound.
    """
    problem = term.as_problem
    if not problem.relu_terms and not np.any(problem.linear_coeffs):
        return ErrorMinimum(_clamp(problem.constant, term.side))
    result = solve_shallow(problem, budget_ms, gap_tol, pivot_tol, node_limit)
    if result.status == OptStatus.INFEASIBLE:
        return ErrorMinimum(0.0, result)
    value = _clamp(result.certified_bound, term.side)
    if result.status != OptStatus.OPTIMAL:
        logger.debug("error term of layer %d: budget exhausted, certified %.6g", term.layer_index, value)
    return ErrorMinimum(value, result)


def _clamp(value: float, side: Side) -> float:
    return max(0.0, value) if side == Side.UPPER else min(0.0, value)
