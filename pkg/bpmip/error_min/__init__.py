"""
Error terms of back-substitution and the MiniMIP / DeepMIP neuron bound procedures.
"""

from .backsub import (BackSubstitutionStep, BackSubstitutionTrace, MipStats, back_substitute_neuron,
                      concretize_partial_mip, direct_first_layer_bound, partial_mip_problem)
from .terms import ErrorMinimum, ErrorTerm, assemble_error_term, minimize_error

__all__ = [
    "BackSubstitutionStep",
    "BackSubstitutionTrace",
    "ErrorMinimum",
    "ErrorTerm",
    "MipStats",
    "assemble_error_term",
    "back_substitute_neuron",
    "concretize_partial_mip",
    "direct_first_layer_bound",
    "minimize_error",
    "partial_mip_problem",
]
