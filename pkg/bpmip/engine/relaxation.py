# pylint: disable=line-too-long, function-name-too-long
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError


class Side(Enum):
    UPPER = "upper"
    LOWER = "lower"

    @property
    def sign(self) -> float:
        return 1.0 if self == Side.UPPER else -1.0


class AlphaKind(Enum):
    CROWN = "crown"
    ZERO = "zero"
    ONE = "one"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class AlphaPolicy:
    """Slope of the lower triangle edge ``alpha * x`` for unstable ReLUs."""
    kind: AlphaKind = AlphaKind.CROWN
    # layer index -> per-neuron alphas
    values: Dict[int, Tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for layer, alphas in self.values.items():
            for alpha in alphas:
                if not 0.0 <= alpha <= 1.0:
                    raise ConfigurationError(f"alpha {alpha} for layer {layer} outside [0, 1]")

    @classmethod
    def crown(cls) -> "AlphaPolicy":
        return cls(AlphaKind.CROWN)

    @classmethod
    def zero(cls) -> "AlphaPolicy":
        return cls(AlphaKind.ZERO)

    @classmethod
    def one(cls) -> "AlphaPolicy":
        return cls(AlphaKind.ONE)

    @classmethod
    def explicit(cls, values: Dict[int, Tuple[float, ...]]) -> "AlphaPolicy":
        return cls(AlphaKind.EXPLICIT, {int(k): tuple(float(a) for a in v) for k, v in values.items()})

    @classmethod
    def parse(cls, spec: str) -> "AlphaPolicy":
        """``crown | zero | one | file:PATH`` (PATH holds ``{"layers": {"1": [...], ...}}``)."""
        spec = spec.strip()
        if spec.startswith("file:"):
            path = spec[len("file:"):]
            try:
                with open(path, "r", encoding="utf-8") as f:
                    data = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigurationError(f"cannot read alpha file {path}: {e}") from e
            layers = data.get("layers", data) if isinstance(data, dict) else None
            if not isinstance(layers, dict):
                raise ConfigurationError(f"alpha file {path} must map layer indices to lists")
            return cls.explicit(layers)
        try:
            kind = AlphaKind(spec.lower())
        except ValueError as e:
            raise ConfigurationError(f"unknown alpha policy {spec!r}") from e
        if kind == AlphaKind.EXPLICIT:
            raise ConfigurationError("explicit alpha policies are given as file:PATH")
        return cls(kind)

    def describe(self) -> str:
        if self.kind == AlphaKind.EXPLICIT:
            return "explicit(" + ",".join(f"{k}:{len(v)}" for k, v in sorted(self.values.items())) + ")"
        return self.kind.value


def choose_alpha(l: float, u: float, policy: AlphaPolicy,
                 layer_index: Optional[int] = None, neuron: Optional[int] = None) -> float:
    """Alpha for an unstable neuron (``l < 0 < u``)."""
    if policy.kind == AlphaKind.CROWN:
        # area-minimizing lower edge; the tie u == -l picks 0
        return 1.0 if u > -l else 0.0
    if policy.kind == AlphaKind.ZERO:
        return 0.0
    if policy.kind == AlphaKind.ONE:
        return 1.0
    alphas = policy.values.get(layer_index)
    if alphas is None or neuron is None or neuron >= len(alphas):
        raise ConfigurationError(f"explicit alpha policy has no value for layer {layer_index} neuron {neuron}")
    return alphas[neuron]


def relaxation_entry(l: float, u: float, alpha: float, coeff_sign: float, side: Side) -> Tuple[float, float]:
    """Slope and intercept of the triangle edge that replaces ``ReLU(x)``, ``x in [l, u]``.

    The chord ``u/(u-l) (x - l)`` is used when the edge must lie above the ReLU from the point of
    view of the bound being built: Upper side with a non-negative coefficient, or Lower side with a
    negative one. Otherwise ``alpha * x``.
    """
    if l >= 0.0:
        return 1.0, 0.0
    if u <= 0.0:
        return 0.0, 0.0
    wants_chord = (coeff_sign >= 0.0) == (side == Side.UPPER)
    if wants_chord:
        slope = u / (u - l)
        return slope, -slope * l
    return alpha, 0.0


@dataclass(frozen=True, eq=False)
class ReluRelaxation:
    """Per-neuron edges chosen for one layer, one bound side and one coefficient vector."""
    layer_index: int
    side: Side
    slope: np.ndarray
    intercept: np.ndarray
    alpha: np.ndarray

    def apply(self, pre: np.ndarray) -> np.ndarray:
        return self.slope * pre + self.intercept


def relax_layer(lower: np.ndarray, upper: np.ndarray, coeffs: np.ndarray, policy: AlphaPolicy,
                layer_index: int, side: Side) -> ReluRelaxation:
    width = coeffs.shape[0]
    slope = np.zeros(width)
    intercept = np.zeros(width)
    alpha = np.zeros(width)
    for j in range(width):
        l, u = float(lower[j]), float(upper[j])
        if l < 0.0 < u:
            alpha[j] = choose_alpha(l, u, policy, layer_index, j)
        # zero coefficients count as non-negative
        sign = 1.0 if coeffs[j] >= 0.0 else -1.0
        slope[j], intercept[j] = relaxation_entry(l, u, alpha[j], sign, side)
    return ReluRelaxation(layer_index, side, slope, intercept, alpha)
