"""
Network module for bpmip.

Layer-structured fully-connected ReLU networks, box domains, file loading and
exact forward evaluation.
"""

from .io import dump_network, load_network, load_network_file, network_from_dict, network_to_dict
from .model import (
    Activation,
    AffineLayer,
    BoxDomain,
    ForwardTrace,
    Network,
    forward_eval,
    forward_eval_batch,
    forward_trace,
)

__all__ = [
    "Activation",
    "AffineLayer",
    "BoxDomain",
    "ForwardTrace",
    "Network",
    "dump_network",
    "forward_eval",
    "forward_eval_batch",
    "forward_trace",
    "load_network",
    "load_network_file",
    "network_from_dict",
    "network_to_dict",
]
