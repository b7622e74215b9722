# pylint: disable=line-too-long, function-name-too-long
import json
import logging
import math
from typing import Any, Dict

from ..errors import NetworkParseError, NetworkShapeError, NetworkValueError
from .model import Activation, AffineLayer, Network

logger = logging.getLogger(__name__)

_ACTIVATIONS = {
    "relu": Activation.RELU,
    "none": Activation.IDENTITY,
    "identity": Activation.IDENTITY,
    "linear": Activation.IDENTITY,
}


def _check_finite(values, number: int, what: str):
    for value in values:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise NetworkParseError(f"layer {number}: {what} entries must be numbers, got {value!r}")
        if not math.isfinite(value):
            raise NetworkValueError(f"layer {number}: non-finite {what} entry {value!r}")


def network_from_dict(data: Dict[str, Any]) -> Network:
    if not isinstance(data, dict):
        raise NetworkParseError("network file must hold an object at the top level")
    if "input_dim" not in data or "layers" not in data:
        raise NetworkParseError("network file needs 'input_dim' and 'layers'")
    input_dim = data["input_dim"]
    if isinstance(input_dim, bool) or not isinstance(input_dim, int):
        raise NetworkParseError(f"input_dim must be an integer, got {input_dim!r}")
    raw_layers = data["layers"]
    if not isinstance(raw_layers, list) or not raw_layers:
        raise NetworkParseError("'layers' must be a non-empty list")

    layers = []
    width = input_dim
    for index, raw in enumerate(raw_layers):
        number = index + 1
        if not isinstance(raw, dict):
            raise NetworkParseError(f"layer {number}: expected an object")
        for key in ("weights", "bias", "activation"):
            if key not in raw:
                raise NetworkParseError(f"layer {number}: missing '{key}'")
        weights, bias = raw["weights"], raw["bias"]
        if not isinstance(weights, list) or not weights or not all(isinstance(row, list) for row in weights):
            raise NetworkParseError(f"layer {number}: 'weights' must be a non-empty list of rows")
        if not isinstance(bias, list):
            raise NetworkParseError(f"layer {number}: 'bias' must be a list")
        activation = _ACTIVATIONS.get(str(raw["activation"]).lower())
        if activation is None:
            raise NetworkParseError(f"layer {number}: unknown activation {raw['activation']!r}")
        for row in weights:
            _check_finite(row, number, "weight")
            if len(row) != width:
                raise NetworkShapeError(
                    f"layer {number}: weight row has {len(row)} columns but the previous layer has width {width}",
                    layer=number)
        _check_finite(bias, number, "bias")
        if len(bias) != len(weights):
            raise NetworkShapeError(f"layer {number}: bias has {len(bias)} entries for {len(weights)} rows", layer=number)
        layers.append(AffineLayer(weights, bias, activation))
        width = len(weights)
    return Network(tuple(layers), input_dim)


def load_network(text: str) -> Network:
    """Parse and validate network-file contents."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetworkParseError(f"malformed network file: {e}") from e
    net = network_from_dict(data)
    logger.debug("loaded network %s", " -> ".join(str(net.width(i)) for i in range(net.depth + 1)))
    return net


def load_network_file(path: str) -> Network:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise NetworkParseError(f"cannot read network file {path}: {e}") from e
    return load_network(text)


def network_to_dict(net: Network) -> Dict[str, Any]:
    return {
        "input_dim": net.input_dim,
        "layers": [
            {
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation.value,
            }
            for layer in net.layers
        ],
    }


def dump_network(net: Network) -> str:
    # json emits floats with repr(), which round-trips exactly
    return json.dumps(network_to_dict(net), indent=1)
