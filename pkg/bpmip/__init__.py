# pylint: disable=line-too-long, function-name-too-long
"""
BPMIP: bound propagation with MIP-refined back-substitution for fully-connected ReLU networks.

This package provides interval, symbolic, MiniMIP and DeepMIP neuron bounds, a built-in
simplex plus branch-and-bound solver for shallow ReLU problems, and an exact oracle for
small instances.
"""

__version__ = "0.1.0"

# Import main modules for easier access
from . import network
from . import mip

# Engine entry points
from .engine import (
    AlphaPolicy,
    EngineConfig,
    EngineConfigFactory,
    LayerBounds,
    Mode,
    Side,
    compute_all_bounds,
    compute_ladder,
)
from .error_min import back_substitute_neuron
from .network import BoxDomain, Network, forward_eval, load_network_file
from . import oracle
from . import recorder

__all__ = [
    "AlphaPolicy",
    "BoxDomain",
    "EngineConfig",
    "EngineConfigFactory",
    "LayerBounds",
    "Mode",
    "Network",
    "Side",
    "__version__",
    "back_substitute_neuron",
    "compute_all_bounds",
    "compute_ladder",
    "forward_eval",
    "load_network_file",
]
