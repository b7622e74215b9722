"""
MIP backend for bpmip.

Bounded-variable simplex, branch-and-bound over ReLU phases for shallow ReLU problems,
and an LP-format exporter for external solvers.
"""

from .lp_export import LpFormatError, LpSummary, check_lp_text, export_lp_text
from .shallow import OptResult, OptStatus, ReluTerm, ShallowReluProblem, solve_shallow
from .simplex import LPResult, LPStatus, Sense, box_extremes, solve_lp

__all__ = [
    "LPResult",
    "LPStatus",
    "LpFormatError",
    "LpSummary",
    "OptResult",
    "OptStatus",
    "ReluTerm",
    "Sense",
    "ShallowReluProblem",
    "box_extremes",
    "check_lp_text",
    "export_lp_text",
    "solve_lp",
    "solve_shallow",
]
