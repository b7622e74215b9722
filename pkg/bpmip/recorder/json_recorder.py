# pylint: disable=line-too-long, function-name-too-long

import json
import os
import tempfile
import threading
from typing import Any, Dict, Optional

import jsonlines


def write_json_atomic(path: str, payload: Dict[str, Any]):
    """Write ``payload`` so that readers never observe a half-written file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".report-", suffix=".json", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True, allow_nan=True)
            f.write("\n")
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


class ReportRecorder:
    """Per-query JSON reports plus a jsonlines trace of suite rows.

    Layout under ``output_dir``::

        reports/<query_id>.json
        traces/trace.jsonl
    """

    def __init__(self, output_dir: str = "./bpmip_output", trace_name: str = "trace.jsonl"):
        self.output_dir = output_dir
        self.report_dir = os.path.join(output_dir, "reports")
        trace_dir = os.path.join(output_dir, "traces")
        os.makedirs(self.report_dir, exist_ok=True)
        os.makedirs(trace_dir, exist_ok=True)
        self.trace_file_path = os.path.join(trace_dir, trace_name)
        self.rows = 0
        self._lock = threading.Lock()

    def report_path(self, query_id: str) -> str:
        safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in query_id)
        return os.path.join(self.report_dir, f"{safe}.json")

    def write_report(self, query_id: str, report: Dict[str, Any], path: Optional[str] = None) -> str:
        target = path or self.report_path(query_id)
        write_json_atomic(target, report)
        return target

    def append_row(self, row: Dict[str, Any]):
        with self._lock:
            with jsonlines.open(self.trace_file_path, "a") as f:
                f.write(row)
            self.rows += 1

    def read_rows(self):
        if not os.path.exists(self.trace_file_path):
            return []
        with jsonlines.open(self.trace_file_path, "r") as f:
            return list(f)
