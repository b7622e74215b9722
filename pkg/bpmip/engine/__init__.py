"""
Bound propagation engine: triangle relaxations, symbolic back-substitution and the
layer-by-layer driver that produces concrete bounds in every mode.
"""

from .bounds import LayerBounds, compute_all_bounds, compute_ladder, interval_affine, interval_propagate
from .config import Concretization, EngineConfig, EngineConfigFactory, Mode, modes_up_to
from .relaxation import AlphaKind, AlphaPolicy, ReluRelaxation, Side, choose_alpha, relax_layer, relaxation_entry
from .symbolic import (SymbolicLinearForm, VarKind, concretize_box, concretize_with_bounds,
                       substitute_previous_layer)

__all__ = [
    "AlphaKind",
    "AlphaPolicy",
    "Concretization",
    "EngineConfig",
    "EngineConfigFactory",
    "LayerBounds",
    "Mode",
    "ReluRelaxation",
    "Side",
    "SymbolicLinearForm",
    "VarKind",
    "choose_alpha",
    "compute_all_bounds",
    "compute_ladder",
    "concretize_box",
    "concretize_with_bounds",
    "interval_affine",
    "interval_propagate",
    "modes_up_to",
    "relax_layer",
    "relaxation_entry",
    "substitute_previous_layer",
]
