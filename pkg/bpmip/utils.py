# pylint: disable=line-too-long, function-name-too-long
"""
Helpers for building fixtures: random networks and boxes, and a small trained classifier
with a labelled dataset for the robustness suite.
"""

import logging
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .network.model import Activation, AffineLayer, BoxDomain, Network, forward_eval_batch

logger = logging.getLogger(__name__)


def random_network(rng: np.random.Generator, input_dim: int, hidden_widths: Sequence[int], output_dim: int = 1,
                   weight_scale: float = 1.0, bias_scale: float = 0.5) -> Network:
    """Network with i.i.d. uniform weights in ``[-weight_scale, weight_scale]``."""
    widths = [input_dim] + list(hidden_widths) + [output_dim]
    layers = []
    for index in range(len(widths) - 1):
        activation = Activation.IDENTITY if index == len(widths) - 2 else Activation.RELU
        weights = rng.uniform(-weight_scale, weight_scale, size=(widths[index + 1], widths[index]))
        bias = rng.uniform(-bias_scale, bias_scale, size=widths[index + 1])
        layers.append(AffineLayer(weights, bias, activation))
    return Network(tuple(layers), input_dim)


def random_box(rng: np.random.Generator, dim: int, max_radius: float = 1.0) -> BoxDomain:
    center = rng.uniform(-1.0, 1.0, size=dim)
    radius = rng.uniform(0.05, max_radius, size=dim)
    return BoxDomain(center - radius, center + radius)


def make_blobs(rng: np.random.Generator, n: int, dim: int = 16, classes: int = 3,
               noise: float = 0.12) -> Tuple[np.ndarray, np.ndarray]:
    """Gaussian blobs clipped to ``[0, 1]^dim``, like normalized pixels."""
    centers = rng.uniform(0.2, 0.8, size=(classes, dim))
    labels = rng.integers(0, classes, size=n)
    points = np.clip(centers[labels] + rng.normal(0.0, noise, size=(n, dim)), 0.0, 1.0)
    return points, labels


def train_classifier(points: np.ndarray, labels: np.ndarray, hidden_widths: Sequence[int] = (8, 8),
                     classes: int = 3, epochs: int = 400, learning_rate: float = 0.5, seed: int = 0) -> Network:
    """Full-batch gradient descent on softmax cross-entropy. Deterministic for a given seed."""
    rng = np.random.default_rng(seed)
    widths = [points.shape[1]] + list(hidden_widths) + [classes]
    weights = [rng.normal(0.0, np.sqrt(2.0 / widths[i]), size=(widths[i + 1], widths[i])) for i in range(len(widths) - 1)]
    biases = [np.zeros(widths[i + 1]) for i in range(len(widths) - 1)]
    onehot = np.eye(classes)[labels]
    n = points.shape[0]

    for epoch in range(epochs):
        activations = [points]
        for W, b in zip(weights[:-1], biases[:-1]):
            activations.append(np.maximum(activations[-1] @ W.T + b, 0.0))
        logits = activations[-1] @ weights[-1].T + biases[-1]
        logits -= logits.max(axis=1, keepdims=True)
        probs = np.exp(logits)
        probs /= probs.sum(axis=1, keepdims=True)
        grad = (probs - onehot) / n
        for index in range(len(weights) - 1, -1, -1):
            grad_W = grad.T @ activations[index]
            grad_b = grad.sum(axis=0)
            if index > 0:
                grad = (grad @ weights[index]) * (activations[index] > 0.0)
            weights[index] -= learning_rate * grad_W
            biases[index] -= learning_rate * grad_b
        if epoch % 100 == 0:
            loss = -float(np.mean(np.log(probs[np.arange(n), labels] + 1e-12)))
            logger.debug("epoch %d loss %.4f", epoch, loss)

    layers = [AffineLayer(W, b, Activation.RELU) for W, b in zip(weights[:-1], biases[:-1])]
    layers.append(AffineLayer(weights[-1], biases[-1], Activation.IDENTITY))
    return Network(tuple(layers), points.shape[1])


def toy_suite(seed: int = 0, n_points: int = 50, train_size: int = 300,
              hidden_widths: Sequence[int] = (8, 8)) -> Tuple[Network, Dict[str, Any]]:
    """A trained 16 -> 8 -> 8 -> 3 classifier and a dataset dict of held-out points."""
    rng = np.random.default_rng(seed)
    points, labels = make_blobs(rng, train_size + n_points)
    net = train_classifier(points[:train_size], labels[:train_size], hidden_widths, seed=seed)
    held_out, held_labels = points[train_size:], labels[train_size:]
    accuracy = float(np.mean(np.argmax(forward_eval_batch(net, held_out), axis=1) == held_labels))
    logger.info("toy classifier held-out accuracy %.2f", accuracy)
    dataset = {
        "valid_range": [0.0, 1.0],
        "points": [{"x": x.tolist(), "label": int(y)} for x, y in zip(held_out, held_labels)],
    }
    return net, dataset


def example_network() -> Network:
    """The bundled three-layer example network: 3 inputs, two hidden ReLU layers of width 3, one output."""
    return Network((
        AffineLayer([[1, 1, 0], [1, -1, 0], [0, 0, 1]], [0, 0, 0], Activation.RELU),
        AffineLayer([[1, 1, 0], [-1, 1, 1], [-1, 1, -1]], [0, 0, 0], Activation.RELU),
        AffineLayer([[1, 1, 1]], [0], Activation.IDENTITY),
    ), 3)


def unit_box(dim: int, radius: float = 1.0, center: Optional[Sequence[float]] = None) -> BoxDomain:
    center = np.zeros(dim) if center is None else np.asarray(center, dtype=np.float64)
    return BoxDomain(center - radius, center + radius)
