# pylint: disable=line-too-long, function-name-too-long
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DimensionError, NetworkShapeError, NetworkValueError


class Activation(Enum):
    RELU = "relu"
    IDENTITY = "none"


@dataclass(frozen=True, eq=False)
class AffineLayer:
    """Dense affine map ``x = W y + b`` followed by ``activation``.

    ``weights[r][c]`` is the coefficient of input neuron ``c`` for output neuron ``r``.
    """
    weights: np.ndarray
    bias: np.ndarray
    activation: Activation = Activation.RELU

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64, ndmin=2)
        bias = np.array(self.bias, dtype=np.float64).reshape(-1)
        weights.setflags(write=False)
        bias.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)
        if bias.shape[0] != weights.shape[0]:
            raise NetworkShapeError(f"bias length {bias.shape[0]} != weight rows {weights.shape[0]}")

    def __eq__(self, other):
        if not isinstance(other, AffineLayer):
            return NotImplemented
        return (self.activation == other.activation and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.bias, other.bias))

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True, eq=False)
class BoxDomain:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=np.float64).reshape(-1)
        upper = np.array(self.upper, dtype=np.float64).reshape(-1)
        if lower.shape != upper.shape:
            raise DimensionError(f"box lower/upper lengths differ: {lower.shape[0]} vs {upper.shape[0]}")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise NetworkValueError("box bounds must be finite")
        if np.any(lower > upper):
            bad = int(np.argmax(lower > upper))
            raise DimensionError(f"box lower > upper at coordinate {bad}")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def center(self) -> np.ndarray:
        return (self.lower + self.upper) / 2.0

    @classmethod
    def from_center(cls, center: Sequence[float], epsilon: float,
                    clip: Optional[Tuple[float, float]] = None) -> "BoxDomain":
        """Robustness box ``[center - eps, center + eps]``, optionally clamped to ``clip``."""
        if epsilon < 0:
            raise DimensionError(f"epsilon must be >= 0, got {epsilon}")
        center = np.asarray(center, dtype=np.float64)
        lower, upper = center - epsilon, center + epsilon
        if clip is not None:
            lower = np.clip(lower, clip[0], clip[1])
            upper = np.clip(upper, clip[0], clip[1])
        return cls(lower, upper)

    def contains(self, point: np.ndarray, tol: float = 0.0) -> bool:
        point = np.asarray(point, dtype=np.float64)
        return bool(np.all(point >= self.lower - tol) and np.all(point <= self.upper + tol))


@dataclass(frozen=True)
class ForwardTrace:
    """Pre-/post-activation values of every layer; index 0 is the input."""
    pre: List[np.ndarray] = field(default_factory=list)
    post: List[np.ndarray] = field(default_factory=list)

    @property
    def output(self) -> np.ndarray:
        return self.post[-1]


@dataclass(frozen=True, eq=False)
class Network:
    """Fully-connected ReLU network.

    ``layers[i]`` maps ``y^i`` to ``x^{i+1}``; every layer but the last applies a ReLU,
    the last is the identity. Immutable after construction.
    """
    layers: Tuple[AffineLayer, ...]
    input_dim: int

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        self.validate()

    def validate(self):
        if self.input_dim <= 0:
            raise NetworkShapeError(f"input_dim must be positive, got {self.input_dim}")
        if not self.layers:
            raise NetworkShapeError("network has no layers")
        width = self.input_dim
        last = len(self.layers) - 1
        for index, layer in enumerate(self.layers):
            number = index + 1
            if layer.in_dim != width:
                raise NetworkShapeError(
                    f"layer {number}: weights have {layer.in_dim} columns but the previous layer has width {width}",
                    layer=number)
            expected = Activation.IDENTITY if index == last else Activation.RELU
            if layer.activation != expected:
                raise NetworkShapeError(
                    f"layer {number}: activation must be {expected.value!r}, got {layer.activation.value!r}",
                    layer=number)
            if not (np.all(np.isfinite(layer.weights)) and np.all(np.isfinite(layer.bias))):
                raise NetworkValueError(f"layer {number}: non-finite weight or bias")
            width = layer.out_dim

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.input_dim == other.input_dim and self.layers == other.layers

    @property
    def depth(self) -> int:
        """Index ``k`` of the output layer."""
        return len(self.layers)

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def width(self, layer_index: int) -> int:
        """Number of neurons in layer ``layer_index`` (0 = input)."""
        if layer_index == 0:
            return self.input_dim
        return self.layers[layer_index - 1].out_dim

    def affine(self, layer_index: int) -> AffineLayer:
        """Affine map producing the pre-activations of ``layer_index`` (>= 1)."""
        return self.layers[layer_index - 1]

    def is_relu_layer(self, layer_index: int) -> bool:
        return 1 <= layer_index < self.depth

    def with_objective(self, coeffs: Sequence[float], constant: float = 0.0) -> "Network":
        """Fold the scalar ``coeffs . output + constant`` into the last affine layer."""
        return self.with_output_map(np.asarray(coeffs, dtype=np.float64).reshape(1, -1), [constant])

    def with_output_map(self, matrix: np.ndarray, offset: Optional[Sequence[float]] = None) -> "Network":
        """Replace the output by ``matrix @ output + offset`` (one row per new output)."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[1] != self.output_dim:
            raise DimensionError(f"output map must have {self.output_dim} columns, got shape {matrix.shape}")
        offset = np.zeros(matrix.shape[0]) if offset is None else np.asarray(offset, dtype=np.float64).reshape(-1)
        last = self.layers[-1]
        folded = AffineLayer(matrix @ last.weights, matrix @ last.bias + offset, Activation.IDENTITY)
        return Network(self.layers[:-1] + (folded,), self.input_dim)


def forward_trace(net: Network, point: Sequence[float]) -> ForwardTrace:
    y = np.asarray(point, dtype=np.float64).reshape(-1)
    if y.shape[0] != net.input_dim:
        raise DimensionError(f"point has length {y.shape[0]}, network expects {net.input_dim}")
    pre, post = [y.copy()], [y.copy()]
    for layer in net.layers:
        x = layer.weights @ y + layer.bias
        y = np.maximum(x, 0.0) if layer.activation == Activation.RELU else x.copy()
        pre.append(x)
        post.append(y)
    return ForwardTrace(pre, post)


def forward_eval(net: Network, point: Sequence[float]) -> np.ndarray:
    """Exact network output at ``point``."""
    return forward_trace(net, point).output


def forward_eval_batch(net: Network, points: np.ndarray) -> np.ndarray:
    """Outputs for a ``(n, input_dim)`` batch of points."""
    y = np.asarray(points, dtype=np.float64)
    if y.ndim != 2 or y.shape[1] != net.input_dim:
        raise DimensionError(f"batch must have shape (n, {net.input_dim}), got {y.shape}")
    for layer in net.layers:
        x = y @ layer.weights.T + layer.bias
        y = np.maximum(x, 0.0) if layer.activation == Activation.RELU else x
    return y
