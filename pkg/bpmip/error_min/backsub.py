# pylint: disable=line-too-long, function-name-too-long
"""
Back-substitution of a single neuron bound, in Symbolic, MiniMIP and DeepMIP flavours.

Starting from the defining sum of ``x^i_j`` over ``y^{i-1}``, the form is rewritten one layer at a
time towards the input. Every depth yields a concrete candidate and the tightest one wins.
DeepMIP subtracts the certified minimum of each layer's error term from every later candidate;
MiniMIP and DeepMIP solve the form exactly once it is one ReLU away from the input.
"""

import logging
import math
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..engine.bounds import LayerBounds, interval_propagate
from ..engine.config import Concretization, EngineConfig, Mode
from ..engine.relaxation import AlphaPolicy, ReluRelaxation, Side, relax_layer
from ..engine.symbolic import (SymbolicLinearForm, VarKind, concretize_box,
                               substitute_previous_layer)
from ..errors import DimensionError, MissingBoundsError
from ..mip.shallow import OptResult, OptStatus, ShallowReluProblem, solve_shallow
from ..mip.simplex import Sense
from ..network.model import BoxDomain, Network
from .terms import ErrorTerm, assemble_error_term, minimize_error

logger = logging.getLogger(__name__)


@dataclass
class MipStats:
    """Counters shared by the neuron workers of one engine run."""
    solves: int = 0
    fallbacks: int = 0
    nodes: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def record(self, result: Optional[OptResult]):
        if result is None:
            return
        with self._lock:
            self.solves += 1
            self.nodes += result.nodes_explored
            if result.status != OptStatus.OPTIMAL:
                self.fallbacks += 1

    def record_fallback(self):
        with self._lock:
            self.fallbacks += 1

    def to_dict(self) -> Dict[str, int]:
        return {"solves": self.solves, "fallbacks": self.fallbacks, "nodes": self.nodes}


def partial_mip_problem(form: SymbolicLinearForm, net: Network, bounds: LayerBounds, side: Side) -> ShallowReluProblem:
    """``omega . ReLU(W^{p-1} y^{p-1} + b^{p-1}) + c`` over the box of ``y^{p-1}``."""
    p = form.layer_index
    if p < 1 or form.var_kind != VarKind.POST_ACTIVATION or not net.is_relu_layer(p):
        raise DimensionError(f"partial MIP needs a form over the ReLU outputs of a hidden layer, got layer {p}")
    if bounds.num_layers < p:
        raise MissingBoundsError(f"bounds for layer {p - 1} are needed for a partial MIP")
    layer = net.affine(p)
    box_lower, box_upper = bounds.post(p - 1)
    terms = [(float(form.coeffs[j]), layer.weights[j], float(layer.bias[j])) for j in range(form.width)]
    sense = Sense.MAXIMIZE if side == Side.UPPER else Sense.MINIMIZE
    return ShallowReluProblem.build(box_lower, box_upper, np.zeros(net.width(p - 1)), form.constant, terms, sense)


def _solve_partial(form: SymbolicLinearForm, net: Network, bounds: LayerBounds, side: Side,
                   budget_ms: Optional[float], cfg: EngineConfig, stats: Optional[MipStats]) -> OptResult:
    problem = partial_mip_problem(form, net, bounds, side)
    result = solve_shallow(problem, budget_ms, cfg.mip_gap, cfg.pivot_tolerance, cfg.node_limit)
    if stats is not None:
        stats.record(result)
    return result


def _certified(result: OptResult, side: Side) -> float:
    if result.status == OptStatus.INFEASIBLE:
        return math.inf if side == Side.UPPER else -math.inf
    return result.certified_bound


def concretize_partial_mip(form: SymbolicLinearForm, net: Network, bounds: LayerBounds, side: Side,
                           budget_ms: Optional[float] = None, cfg: Optional[EngineConfig] = None,
                           stats: Optional[MipStats] = None) -> float:
    """Concrete ``side`` bound of a form one ReLU deep in the previous layer, solved by branch-and-bound.

    When the budget runs out the result is still a certified bound, tightened by the triangle-relaxed
    concretization of the same form.
    """
    cfg = cfg or EngineConfig()
    result = _solve_partial(form, net, bounds, side, budget_ms, cfg, stats)
    bound = _certified(result, side)
    if result.status != OptStatus.OPTIMAL:
        relaxed = substitute_previous_layer(form, net, bounds, cfg.alpha, side)
        fallback = concretize_box(relaxed, *bounds.post(form.layer_index - 1), side)
        logger.info("partial MIP at layer %d not solved to optimality; relaxed bound %.6g", form.layer_index, fallback)
        bound = min(bound, fallback) if side == Side.UPPER else max(bound, fallback)
    return bound


def direct_first_layer_bound(form: SymbolicLinearForm, net: Network, dom: BoxDomain, side: Side,
                             budget_ms: Optional[float] = None, policy: Optional[AlphaPolicy] = None,
                             stats: Optional[MipStats] = None) -> float:
    """Optimum of a form over ``y^1 = ReLU(W^0 x^0 + b^0)`` with ``x^0`` ranging over ``dom``."""
    if form.layer_index != 1:
        raise DimensionError(f"expected a form over layer 1, got layer {form.layer_index}")
    cfg = EngineConfig(alpha=policy or AlphaPolicy.crown())
    # layer-1 interval bounds are exact
    bounds = interval_propagate(net, dom)
    return concretize_partial_mip(form, net, bounds, side, budget_ms, cfg, stats)


@dataclass
class BackSubstitutionStep:
    depth: int
    form: SymbolicLinearForm
    error_sum: float
    box_candidate: float
    mip_candidate: Optional[float] = None
    relaxation: Optional[ReluRelaxation] = None
    error_term: Optional[ErrorTerm] = None
    error_min: Optional[float] = None


@dataclass
class BackSubstitutionTrace:
    layer_index: int
    neuron: int
    side: Side
    mode: Mode
    bound: float = math.nan
    steps: List[BackSubstitutionStep] = field(default_factory=list)

    def error_terms(self) -> List[ErrorTerm]:
        return [s.error_term for s in self.steps if s.error_term is not None]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer": self.layer_index,
            "neuron": self.neuron,
            "side": self.side.value,
            "mode": self.mode.value,
            "bound": self.bound,
            "steps": [
                {"depth": s.depth, "box_candidate": s.box_candidate, "mip_candidate": s.mip_candidate,
                 "error_min": s.error_min, "error_sum": s.error_sum}
                for s in self.steps
            ],
        }


_EXPIRED = -1.0


def _budget(cfg: EngineConfig, deadline: Optional[float]) -> Optional[float]:
    """Per-solve budget in ms, capped by the neuron deadline; ``_EXPIRED`` once it has passed."""
    if deadline is None:
        return cfg.mip_budget_ms
    remaining = (deadline - time.monotonic()) * 1000.0
    if remaining <= 0.0:
        return _EXPIRED
    return remaining if cfg.mip_budget_ms is None else min(cfg.mip_budget_ms, remaining)


def back_substitute_neuron(net: Network, bounds: LayerBounds, layer_index: int, neuron: int, side: Side,
                           mode: Mode, policy: AlphaPolicy, cfg: Optional[EngineConfig] = None,
                           stats: Optional[MipStats] = None, trace: bool = False
                           ) -> Union[float, BackSubstitutionTrace]:
    """Concrete ``side`` bound of ``x^{layer_index}_{neuron}``.

    Returns the bound, or the full ``BackSubstitutionTrace`` when ``trace`` is set.
    """
    cfg = cfg or EngineConfig()
    if bounds.num_layers < layer_index:
        raise MissingBoundsError(f"bounds for layers below {layer_index} are incomplete")
    deadline = None if cfg.neuron_budget_ms is None else time.monotonic() + cfg.neuron_budget_ms / 1000.0
    upper_side = side == Side.UPPER

    def tighter(a: float, b: float) -> float:
        return min(a, b) if upper_side else max(a, b)

    record = BackSubstitutionTrace(layer_index, neuron, side, mode)
    form = SymbolicLinearForm.for_neuron(net, layer_index, neuron)
    best = math.inf if upper_side else -math.inf
    error_sum = 0.0

    while True:
        p = form.layer_index
        step = BackSubstitutionStep(p, form, error_sum, concretize_box(form, *bounds.post(p), side) - error_sum)
        record.steps.append(step)
        best = tighter(best, step.box_candidate)
        if p == 0 or mode == Mode.INTERVAL:
            break

        wants_mip = mode.uses_mip and (p == 1 or (mode == Mode.DEEPMIP and cfg.concretization == Concretization.MIP))
        if wants_mip:
            budget = _budget(cfg, deadline)
            if budget == _EXPIRED:
                if stats is not None:
                    stats.record_fallback()
            else:
                result = _solve_partial(form, net, bounds, side, budget, cfg, stats)
                step.mip_candidate = _certified(result, side) - error_sum
                best = tighter(best, step.mip_candidate)
                if p == 1 and result.status == OptStatus.OPTIMAL:
                    # exact over the input box: substituting further cannot improve
                    break

        relaxation = relax_layer(*bounds.pre(p), form.coeffs, policy, p, side)
        step.relaxation = relaxation
        if mode == Mode.DEEPMIP or trace:
            step.error_term = assemble_error_term(form, net, bounds, relaxation, side)
        if mode == Mode.DEEPMIP:
            budget = _budget(cfg, deadline)
            if budget == _EXPIRED:
                # zero is the trivial certified error bound
                step.error_min = 0.0
                if stats is not None:
                    stats.record_fallback()
            else:
                minimum = minimize_error(step.error_term, budget, cfg.mip_gap, cfg.pivot_tolerance, cfg.node_limit)
                if stats is not None:
                    stats.record(minimum.result)
                step.error_min = minimum.value
            error_sum += step.error_min
        form = substitute_previous_layer(form, net, bounds, policy, side, relaxation)

    record.bound = best
    if trace:
        return record
    return best
