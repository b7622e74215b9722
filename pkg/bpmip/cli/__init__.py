"""
Command-line layer: queries and verdicts, the refinement cascade, the robustness suite
and the ``bpmip`` entry point.
"""

from .query import (CASCADE, ModeOutcome, Property, PropertyKind, Query, Report, Verdict, compare, load_query,
                    load_query_file, run_cascade, run_modes, run_query)
from .suite import SuiteSummary, margin_network, run_robustness_suite

__all__ = [
    "CASCADE",
    "ModeOutcome",
    "Property",
    "PropertyKind",
    "Query",
    "Report",
    "SuiteSummary",
    "Verdict",
    "compare",
    "load_query",
    "load_query_file",
    "margin_network",
    "run_cascade",
    "run_modes",
    "run_query",
    "run_robustness_suite",
]
