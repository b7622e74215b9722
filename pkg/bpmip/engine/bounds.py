# pylint: disable=line-too-long, function-name-too-long
"""
Concrete per-neuron bounds and interval propagation.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DimensionError, MissingBoundsError
from ..network.model import BoxDomain, Network
from .config import EngineConfig, Mode, modes_up_to
from .relaxation import AlphaPolicy, Side

logger = logging.getLogger(__name__)


@dataclass
class LayerBounds:
    """Bounds for layers ``0..k``; entry 0 is the input box.

    Built one layer at a time by ``append``. For ReLU layers the post bounds are the
    non-negative part of the pre bounds; for the input and the output layer post == pre.
    """
    pre_lower: List[np.ndarray] = field(default_factory=list)
    pre_upper: List[np.ndarray] = field(default_factory=list)
    post_lower: List[np.ndarray] = field(default_factory=list)
    post_upper: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def start(cls, dom: BoxDomain) -> "LayerBounds":
        bounds = cls()
        bounds.append(dom.lower, dom.upper, relu=False)
        return bounds

    @property
    def num_layers(self) -> int:
        return len(self.pre_lower)

    def require(self, layer_index: int):
        if layer_index < 0 or layer_index >= self.num_layers:
            raise MissingBoundsError(f"no concrete bounds for layer {layer_index} (have {self.num_layers} layers)")

    def append(self, lower: np.ndarray, upper: np.ndarray, relu: bool, tolerance: float = 1e-9):
        lower = np.array(lower, dtype=np.float64).reshape(-1)
        upper = np.array(upper, dtype=np.float64).reshape(-1)
        crossed = lower - upper
        slack = tolerance * np.maximum(1.0, np.abs(lower))
        # floating-point noise can cross the bounds of a neuron that is exactly determined
        upper = np.where((crossed > 0.0) & (crossed <= slack), lower, upper)
        wide = np.flatnonzero(crossed > slack)
        if wide.size:
            logger.warning("layer %d: bounds of neurons %s cross by up to %.3g; keeping their hull",
                           self.num_layers, wide.tolist(), float(crossed[wide].max()))
            lower[wide], upper[wide] = upper[wide], lower[wide].copy()
        self.pre_lower.append(lower)
        self.pre_upper.append(upper)
        if relu:
            self.post_lower.append(np.maximum(lower, 0.0))
            self.post_upper.append(np.maximum(upper, 0.0))
        else:
            self.post_lower.append(lower.copy())
            self.post_upper.append(upper.copy())

    def pre(self, layer_index: int) -> Tuple[np.ndarray, np.ndarray]:
        self.require(layer_index)
        return self.pre_lower[layer_index], self.pre_upper[layer_index]

    def post(self, layer_index: int) -> Tuple[np.ndarray, np.ndarray]:
        self.require(layer_index)
        return self.post_lower[layer_index], self.post_upper[layer_index]

    @property
    def output(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.pre_lower[-1], self.pre_upper[-1]

    def unstable_count(self, net: Network) -> int:
        return sum(int(np.sum((self.pre_lower[i] < 0.0) & (self.pre_upper[i] > 0.0)))
                   for i in range(1, min(self.num_layers, net.depth)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layers": [
                {"layer": i, "lower": self.pre_lower[i].tolist(), "upper": self.pre_upper[i].tolist()}
                for i in range(self.num_layers)
            ]
        }


def interval_affine(weights: np.ndarray, bias: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Interval image of ``W y + b`` for ``y`` in ``[lower, upper]`` (coefficient-sign split)."""
    pos = np.maximum(weights, 0.0)
    neg = np.minimum(weights, 0.0)
    return pos @ lower + neg @ upper + bias, pos @ upper + neg @ lower + bias


def interval_propagate(net: Network, dom: BoxDomain) -> LayerBounds:
    if dom.dim != net.input_dim:
        raise DimensionError(f"domain has {dom.dim} coordinates, network expects {net.input_dim}")
    bounds = LayerBounds.start(dom)
    for i in range(1, net.depth + 1):
        layer = net.affine(i)
        lower, upper = interval_affine(layer.weights, layer.bias, *bounds.post(i - 1))
        bounds.append(lower, upper, relu=net.is_relu_layer(i))
    return bounds


def _layer_bounds(net: Network, bounds: LayerBounds, layer_index: int, mode: Mode, policy: AlphaPolicy,
                  cfg: EngineConfig, stats, executor: Optional[ThreadPoolExecutor]) -> Tuple[np.ndarray, np.ndarray]:
    layer = net.affine(layer_index)
    if mode == Mode.INTERVAL:
        return interval_affine(layer.weights, layer.bias, *bounds.post(layer_index - 1))
    # imported here: error_min builds on this module
    from ..error_min.backsub import back_substitute_neuron

    jobs = [(j, side) for j in range(layer.out_dim) for side in (Side.LOWER, Side.UPPER)]

    def run(job):
        j, side = job
        return back_substitute_neuron(net, bounds, layer_index, j, side, mode, policy, cfg, stats)

    values = list(executor.map(run, jobs)) if executor is not None else [run(job) for job in jobs]
    lower = np.array(values[0::2], dtype=np.float64)
    upper = np.array(values[1::2], dtype=np.float64)
    return lower, upper


def compute_ladder(net: Network, dom: BoxDomain, modes: Optional[Sequence[Mode]] = None,
                   policy: Optional[AlphaPolicy] = None, cfg: Optional[EngineConfig] = None,
                   stats=None, timings: Optional[Dict[Mode, float]] = None) -> Dict[Mode, LayerBounds]:
    """Bounds of every requested mode from one layer-by-layer pass.

    With ``cfg.nest_modes`` every cheaper mode is computed alongside and each mode's bounds are
    intersected with those of the next cheaper one, so a neuron never ends up looser than in a
    cheaper mode. When ``timings`` is given it receives the seconds spent per mode, including
    the cheaper modes it was nested on.
    """
    from ..error_min.backsub import MipStats

    cfg = cfg or EngineConfig()
    policy = policy or cfg.alpha
    stats = stats if stats is not None else MipStats()
    if dom.dim != net.input_dim:
        raise DimensionError(f"domain has {dom.dim} coordinates, network expects {net.input_dim}")
    requested = sorted(set(modes or [cfg.mode]), key=lambda m: m.rank)
    ladder = modes_up_to(requested[-1]) if cfg.nest_modes else requested
    results = {mode: LayerBounds.start(dom) for mode in ladder}
    spent = {mode: 0.0 for mode in ladder}

    executor = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for i in range(1, net.depth + 1):
            started = time.monotonic()
            previous = None
            for mode in ladder:
                mode_started = time.monotonic()
                lower, upper = _layer_bounds(net, results[mode], i, mode, policy, cfg, stats, executor)
                if cfg.nest_modes and previous is not None:
                    lower = np.maximum(lower, previous[0])
                    upper = np.minimum(upper, previous[1])
                results[mode].append(lower, upper, relu=net.is_relu_layer(i), tolerance=cfg.tolerance)
                previous = results[mode].pre(i)
                spent[mode] += time.monotonic() - mode_started
            logger.info("layer %d/%d bounded in %.3fs (%s)", i, net.depth, time.monotonic() - started,
                        ", ".join(m.value for m in ladder))
    finally:
        if executor is not None:
            executor.shutdown(wait=True)
    if timings is not None:
        total = 0.0
        for mode in ladder:
            total = total + spent[mode] if cfg.nest_modes else spent[mode]
            if mode in requested:
                timings[mode] = total
    return {mode: results[mode] for mode in requested}


def compute_all_bounds(net: Network, dom: BoxDomain, mode: Optional[Mode] = None,
                       policy: Optional[AlphaPolicy] = None, cfg: Optional[EngineConfig] = None,
                       stats=None) -> LayerBounds:
    """Concrete pre-/post-activation bounds of every layer in one mode."""
    cfg = cfg or EngineConfig()
    mode = mode or cfg.mode
    return compute_ladder(net, dom, [mode], policy, cfg, stats)[mode]
