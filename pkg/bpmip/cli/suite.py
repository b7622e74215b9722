# pylint: disable=line-too-long, function-name-too-long
"""
Robustness suite: for each correctly classified point, prove that the true logit beats every other
logit over the epsilon-box around it, in each requested mode, and tabulate solved counts and mean
times per mode.
"""

import asyncio
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from rich.console import Console
from rich.table import Table
from tqdm import tqdm

from ..engine.bounds import compute_ladder
from ..engine.config import EngineConfig, Mode
from ..error_min.backsub import MipStats
from ..errors import QueryError
from ..network.io import load_network_file
from ..network.model import BoxDomain, Network, forward_eval
from ..recorder import ReportRecorder
from .query import CASCADE

logger = logging.getLogger(__name__)


@dataclass
class PointResult:
    index: int
    label: int
    predicted: int
    skipped: bool = False
    solved: Dict[str, bool] = field(default_factory=dict)
    margins: Dict[str, float] = field(default_factory=dict)
    seconds: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"index": self.index, "label": self.label, "predicted": self.predicted, "skipped": self.skipped,
                "solved": self.solved, "margins": self.margins, "seconds": self.seconds}


@dataclass
class ModeSummary:
    mode: Mode
    solved: int
    mean_seconds: float


@dataclass
class SuiteSummary:
    epsilon: float
    total: int
    skipped: int
    modes: List[ModeSummary]
    points: List[PointResult]
    mip: Dict[str, int] = field(default_factory=dict)

    @property
    def evaluated(self) -> int:
        return self.total - self.skipped

    def solved(self, mode: Mode) -> int:
        return next(m.solved for m in self.modes if m.mode == mode)

    def mean_seconds(self, mode: Mode) -> float:
        return next(m.mean_seconds for m in self.modes if m.mode == mode)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "total": self.total,
            "skipped": self.skipped,
            "evaluated": self.evaluated,
            "modes": {m.mode.value: {"solved": m.solved} for m in self.modes},
            "points": [{k: v for k, v in p.to_dict().items() if k != "seconds"} for p in self.points],
            "mip": self.mip,
            "timings": {m.mode.value: m.mean_seconds for m in self.modes},
        }

    def render(self, console: Optional[Console] = None):
        console = console or Console()
        table = Table(title=f"robustness suite, epsilon={self.epsilon:g} ({self.evaluated} of {self.total} points evaluated)")
        table.add_column("mode")
        table.add_column("solved", justify="right")
        table.add_column("mean time [s]", justify="right")
        for m in self.modes:
            table.add_row(m.mode.value, str(m.solved), f"{m.mean_seconds:.3f}")
        console.print(table)


def load_dataset(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise QueryError(f"cannot read dataset {path}: {e}") from e
    return validate_dataset(data)


def validate_dataset(data: Any) -> Dict[str, Any]:
    if not isinstance(data, dict) or not isinstance(data.get("points"), list):
        raise QueryError("dataset must be an object with a 'points' list")
    for index, point in enumerate(data["points"]):
        if not isinstance(point, dict) or "x" not in point or "label" not in point:
            raise QueryError(f"dataset point {index} needs 'x' and 'label'")
    valid_range = data.get("valid_range")
    if valid_range is not None and (len(valid_range) != 2 or valid_range[0] > valid_range[1]):
        raise QueryError(f"bad valid_range {valid_range!r}")
    return data


def margin_network(net: Network, label: int) -> Network:
    """Outputs ``logit[label] - logit[other]`` for every other class, in class order."""
    classes = net.output_dim
    rows = []
    for other in range(classes):
        if other == label:
            continue
        row = np.zeros(classes)
        row[label], row[other] = 1.0, -1.0
        rows.append(row)
    return net.with_output_map(np.array(rows))


def evaluate_point(net: Network, index: int, x: Sequence[float], label: int, epsilon: float,
                   valid_range: Optional[Tuple[float, float]], modes: Sequence[Mode], cfg: EngineConfig,
                   query_timeout_s: Optional[float] = None, stats: Optional[MipStats] = None) -> PointResult:
    """Every competitor query of one point (property: margin >= 0), mode by mode."""
    predicted = int(np.argmax(forward_eval(net, x)))
    result = PointResult(index, int(label), predicted)
    if predicted != label:
        logger.info("point %d misclassified (label %d, predicted %d); skipped", index, label, predicted)
        result.skipped = True
        return result
    dom = BoxDomain.from_center(x, epsilon, valid_range)
    margins = margin_network(net, int(label))
    timings: Dict[Mode, float] = {}
    ladder = compute_ladder(margins, dom, modes, cfg.alpha, cfg, stats, timings)
    for mode in modes:
        seconds = timings[mode]
        lowest = float(np.min(ladder[mode].output[0]))
        timed_out = query_timeout_s is not None and seconds > query_timeout_s
        result.solved[mode.value] = lowest >= 0.0 and not timed_out
        result.margins[mode.value] = lowest
        result.seconds[mode.value] = seconds
    return result


async def _run_points(net: Network, points: List[Dict[str, Any]], epsilon: float, valid_range, modes, cfg: EngineConfig,
                      workers: int, query_timeout_s, recorder: Optional[ReportRecorder], stats: MipStats,
                      show_progress: bool) -> List[PointResult]:
    semaphore = asyncio.Semaphore(workers)
    loop = asyncio.get_running_loop()
    progress = tqdm(total=len(points), desc="robustness suite", disable=not show_progress)
    with ThreadPoolExecutor(max_workers=workers) as executor:

        async def one(index: int, point: Dict[str, Any]) -> PointResult:
            async with semaphore:
                row = await loop.run_in_executor(
                    executor,
                    lambda: evaluate_point(net, index, point["x"], int(point["label"]), epsilon, valid_range, modes,
                                           cfg, query_timeout_s, stats)
                )
            progress.update(1)
            if recorder is not None:
                payload = {"epsilon": epsilon, **row.to_dict()}
                recorder.write_report(f"point-{index}", payload)
                recorder.append_row(payload)
            return row

        try:
            return list(await asyncio.gather(*(one(i, p) for i, p in enumerate(points))))
        finally:
            progress.close()


def run_robustness_suite(network: Union[str, Network], dataset: Union[str, Dict[str, Any]], epsilon: float,
                         cfg: Optional[EngineConfig] = None, modes: Optional[Sequence[Mode]] = None,
                         workers: Optional[int] = None, query_timeout_s: Optional[float] = None,
                         recorder: Optional[ReportRecorder] = None, show_progress: bool = False) -> SuiteSummary:
    """Solved counts and mean per-point time for each mode over a labelled dataset."""
    if epsilon < 0:
        raise QueryError(f"epsilon must be >= 0, got {epsilon}")
    cfg = cfg or EngineConfig()
    net = load_network_file(network) if isinstance(network, str) else network
    data = load_dataset(dataset) if isinstance(dataset, str) else validate_dataset(dataset)
    if net.output_dim < 2:
        raise QueryError("the robustness suite needs a network with at least two outputs")
    modes = sorted(set(modes or CASCADE), key=lambda m: m.rank)
    workers = workers or cfg.workers
    if query_timeout_s is not None:
        cfg = replace(cfg, neuron_budget_ms=query_timeout_s * 1000.0)
    # parallelism is across points; each engine run stays single-threaded
    engine_cfg = replace(cfg, workers=1)
    valid_range = data.get("valid_range")
    valid_range = None if valid_range is None else (float(valid_range[0]), float(valid_range[1]))

    stats = MipStats()
    rows = asyncio.run(_run_points(net, data["points"], epsilon, valid_range, modes, engine_cfg, workers,
                                   query_timeout_s, recorder, stats, show_progress))
    evaluated = [r for r in rows if not r.skipped]
    summaries = []
    for mode in modes:
        times = [r.seconds[mode.value] for r in evaluated]
        summaries.append(ModeSummary(mode, sum(r.solved[mode.value] for r in evaluated),
                                     float(np.mean(times)) if times else 0.0))
    summary = SuiteSummary(epsilon, len(rows), len(rows) - len(evaluated), summaries, rows, stats.to_dict())
    logger.info("suite done: %s", ", ".join(f"{m.mode.value} {m.solved}/{len(evaluated)}" for m in summaries))
    return summary
