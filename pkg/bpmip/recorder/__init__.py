"""
Recorder module for bpmip.

Writes per-query JSON reports atomically and appends suite rows to a jsonlines trace.
"""

from .json_recorder import ReportRecorder, write_json_atomic

__all__ = ["ReportRecorder", "write_json_atomic"]
