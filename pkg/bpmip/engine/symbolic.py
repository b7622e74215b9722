# pylint: disable=line-too-long, function-name-too-long
"""
Symbolic linear forms and one step of back-substitution.

A form ``omega . v + c`` ranges over the pre- or post-activations ``v`` of a single layer.
Substituting a post-activation form replaces every ``ReLU(x^p_j)`` by its triangle edge and then
``x^p`` by ``W^{p-1} y^{p-1} + b^{p-1}``.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import DimensionError, MissingBoundsError
from ..network.model import Network
from .bounds import LayerBounds
from .relaxation import AlphaPolicy, ReluRelaxation, Side, relax_layer


class VarKind(Enum):
    PRE_ACTIVATION = "pre"
    POST_ACTIVATION = "post"


@dataclass(frozen=True, eq=False)
class SymbolicLinearForm:
    layer_index: int
    var_kind: VarKind
    coeffs: np.ndarray
    constant: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "constant", float(self.constant))

    @property
    def width(self) -> int:
        return self.coeffs.shape[0]

    def evaluate(self, values: np.ndarray) -> float:
        return float(self.coeffs @ np.asarray(values, dtype=np.float64)) + self.constant

    @classmethod
    def for_neuron(cls, net: Network, layer_index: int, neuron: int) -> "SymbolicLinearForm":
        """The defining sum of ``x^i_j`` as a form over the post-activations of layer ``i - 1``."""
        layer = net.affine(layer_index)
        return cls(layer_index - 1, VarKind.POST_ACTIVATION, layer.weights[neuron].copy(), float(layer.bias[neuron]))


def substitute_previous_layer(form: SymbolicLinearForm, net: Network, bounds: LayerBounds, policy: AlphaPolicy,
                              side: Side, relaxation: Optional[ReluRelaxation] = None) -> SymbolicLinearForm:
    """Rewrite ``form`` over the post-activations of layer ``p - 1`` as a valid ``side`` bound."""
    p = form.layer_index
    if p < 1:
        raise DimensionError("cannot substitute past the input layer")
    if form.width != net.width(p):
        raise DimensionError(f"form has {form.width} coefficients, layer {p} has width {net.width(p)}")
    layer = net.affine(p)
    if form.var_kind == VarKind.PRE_ACTIVATION or not net.is_relu_layer(p):
        # no activation between the form and the affine map
        scaled = form.coeffs
        extra = 0.0
    else:
        if bounds.num_layers <= p:
            raise MissingBoundsError(f"bounds for layer {p} are needed to relax its ReLUs")
        if relaxation is None:
            relaxation = relax_layer(*bounds.pre(p), form.coeffs, policy, p, side)
        scaled = form.coeffs * relaxation.slope
        extra = float(form.coeffs @ relaxation.intercept)
    coeffs = scaled @ layer.weights
    constant = form.constant + float(scaled @ layer.bias) + extra
    return SymbolicLinearForm(p - 1, VarKind.POST_ACTIVATION, coeffs, constant)


def concretize_box(form: SymbolicLinearForm, lower: np.ndarray, upper: np.ndarray, side: Side) -> float:
    """Exact optimum of the form over a box: the max for Upper, the min for Lower."""
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    if lower.shape[0] != form.width or upper.shape[0] != form.width:
        raise DimensionError(f"box of width {lower.shape[0]} for a form of width {form.width}")
    pos = np.maximum(form.coeffs, 0.0)
    neg = np.minimum(form.coeffs, 0.0)
    if side == Side.UPPER:
        return float(pos @ upper + neg @ lower) + form.constant
    return float(pos @ lower + neg @ upper) + form.constant


def concretize_with_bounds(form: SymbolicLinearForm, bounds: LayerBounds, side: Side) -> float:
    if form.var_kind == VarKind.PRE_ACTIVATION:
        lower, upper = bounds.pre(form.layer_index)
    else:
        lower, upper = bounds.post(form.layer_index)
    return concretize_box(form, lower, upper, side)
