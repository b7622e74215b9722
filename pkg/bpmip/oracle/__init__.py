"""
Ground truth for small instances: exhaustive phase enumeration and deterministic sampling.
"""

from .enumerate import MAX_UNSTABLE_RELUS, count_unstable, enumerate_network_extremes, enumerate_shallow
from .sampling import sample_extremes, sample_outputs, sample_points

__all__ = [
    "MAX_UNSTABLE_RELUS",
    "count_unstable",
    "enumerate_network_extremes",
    "enumerate_shallow",
    "sample_extremes",
    "sample_outputs",
    "sample_points",
]
