# pylint: disable=line-too-long, function-name-too-long
import itertools
from typing import Tuple

import numpy as np

from ..errors import DimensionError
from ..network.model import BoxDomain, Network, forward_eval_batch

MAX_VERTEX_DIM = 12


def sample_points(dom: BoxDomain, n: int, seed: int = 0) -> np.ndarray:
    """Deterministic ``(n, dim)`` sample: the centre, every vertex when ``dim <= 12``, then uniform draws."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    points = [dom.center[None, :]]
    count = 1
    if dom.dim <= MAX_VERTEX_DIM and count < n:
        corners = np.array(list(itertools.product((0, 1), repeat=dom.dim)), dtype=np.float64)[: n - count]
        points.append(dom.lower + corners * (dom.upper - dom.lower))
        count += corners.shape[0]
    if count < n:
        rng = np.random.default_rng(seed)
        points.append(rng.uniform(dom.lower, dom.upper, size=(n - count, dom.dim)))
    return np.concatenate(points, axis=0)


def sample_outputs(net: Network, dom: BoxDomain, n: int, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    if dom.dim != net.input_dim:
        raise DimensionError(f"domain has {dom.dim} coordinates, network expects {net.input_dim}")
    points = sample_points(dom, n, seed)
    return points, forward_eval_batch(net, points)


def sample_extremes(net: Network, dom: BoxDomain, n: int, seed: int = 0, out_index: int = 0) -> Tuple[float, float]:
    """Smallest and largest sampled value of output ``out_index``: an inner bound on its range."""
    _, outputs = sample_outputs(net, dom, n, seed)
    values = outputs[:, out_index]
    return float(values.min()), float(values.max())
