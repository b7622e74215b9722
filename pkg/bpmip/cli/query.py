# pylint: disable=line-too-long, function-name-too-long
"""
Queries, verdicts and reports.

A query bounds the scalar ``coeffs . N(x) + constant`` over a box and, when it carries a property,
decides ``max <= threshold`` or ``min >= threshold``. The engine is incomplete, so the verdict is
either Holds or Unknown; a sampled violating point is attached as a witness but never turns the
verdict into a violation.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .. import __version__
from ..engine.bounds import LayerBounds, compute_all_bounds
from ..engine.config import EngineConfig, Mode
from ..error_min.backsub import MipStats
from ..errors import DimensionError, QueryError
from ..network.io import load_network_file
from ..network.model import BoxDomain, Network
from ..oracle.sampling import sample_outputs

logger = logging.getLogger(__name__)

CASCADE = (Mode.INTERVAL, Mode.SYMBOLIC, Mode.MINIMIP, Mode.DEEPMIP)
WITNESS_SAMPLES = 1000


class PropertyKind(Enum):
    MAX_LEQ = "max_leq"
    MIN_GEQ = "min_geq"


class Verdict(Enum):
    HOLDS = "holds"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Property:
    kind: PropertyKind
    threshold: float

    def decide(self, lower: float, upper: float) -> Verdict:
        if self.kind == PropertyKind.MAX_LEQ:
            return Verdict.HOLDS if upper <= self.threshold else Verdict.UNKNOWN
        return Verdict.HOLDS if lower >= self.threshold else Verdict.UNKNOWN

    def violated_by(self, value: float) -> bool:
        if self.kind == PropertyKind.MAX_LEQ:
            return value > self.threshold
        return value < self.threshold


@dataclass(frozen=True, eq=False)
class Query:
    domain: BoxDomain
    coeffs: np.ndarray
    constant: float = 0.0
    prop: Optional[Property] = None

    def objective_network(self, net: Network) -> Network:
        return net.with_objective(self.coeffs, self.constant)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], output_dim: int) -> "Query":
        if not isinstance(data, dict) or "domain" not in data:
            raise QueryError("query must be an object with a 'domain'")
        domain = _parse_domain(data["domain"])
        objective = data.get("objective")
        if objective is None:
            coeffs = np.zeros(output_dim)
            coeffs[0] = 1.0
            constant = 0.0
        else:
            try:
                coeffs = np.asarray(objective["coeffs"], dtype=np.float64).reshape(-1)
                constant = float(objective.get("constant", 0.0))
            except (KeyError, TypeError, ValueError) as e:
                raise QueryError(f"bad objective: {e}") from e
        if coeffs.shape[0] != output_dim:
            raise DimensionError(f"objective has {coeffs.shape[0]} coefficients, network has {output_dim} outputs")
        prop = None
        if data.get("property") is not None:
            raw = data["property"]
            try:
                prop = Property(PropertyKind(raw["kind"]), float(raw["threshold"]))
            except (KeyError, TypeError, ValueError) as e:
                raise QueryError(f"bad property {raw!r}: expected kind max_leq|min_geq and a threshold") from e
        return cls(domain, coeffs, constant, prop)


def _parse_domain(raw: Dict[str, Any]) -> BoxDomain:
    try:
        if "center" in raw:
            clip = raw.get("clip")
            return BoxDomain.from_center(raw["center"], float(raw["epsilon"]),
                                         None if clip is None else (float(clip[0]), float(clip[1])))
        return BoxDomain(raw["lower"], raw["upper"])
    except (KeyError, TypeError, ValueError) as e:
        raise QueryError(f"bad domain: {e}") from e


def load_query(text: str, output_dim: int) -> Query:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise QueryError(f"query is not valid JSON: {e}") from e
    return Query.from_dict(data, output_dim)


def load_query_file(path: str, output_dim: int) -> Query:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise QueryError(f"cannot read query file {path}: {e}") from e
    return load_query(text, output_dim)


@dataclass
class ModeOutcome:
    mode: Mode
    lower: float
    upper: float
    seconds: float
    verdict: Optional[Verdict] = None
    layer_bounds: Optional[LayerBounds] = None


@dataclass
class Report:
    network: str
    query: str
    config: Dict[str, Any]
    outcomes: List[ModeOutcome] = field(default_factory=list)
    verdict: Optional[Verdict] = None
    decided_by: Optional[Mode] = None
    mip: Dict[str, int] = field(default_factory=dict)
    witness: Optional[Dict[str, Any]] = None
    timings: Dict[str, float] = field(default_factory=dict)
    version: str = __version__

    @property
    def exit_code(self) -> int:
        return 0 if self.verdict in (None, Verdict.HOLDS) else 1

    def outcome(self, mode: Mode) -> ModeOutcome:
        for outcome in self.outcomes:
            if outcome.mode == mode:
                return outcome
        raise KeyError(mode)

    def to_dict(self, include_layers: bool = False) -> Dict[str, Any]:
        bounds = {}
        for o in self.outcomes:
            entry: Dict[str, Any] = {"lower": o.lower, "upper": o.upper,
                                     "verdict": None if o.verdict is None else o.verdict.value}
            if include_layers and o.layer_bounds is not None:
                entry["layers"] = o.layer_bounds.to_dict()["layers"]
            bounds[o.mode.value] = entry
        return {
            "tool": "bpmip",
            "version": self.version,
            "network": self.network,
            "query": self.query,
            "config": self.config,
            "bounds": bounds,
            "verdict": None if self.verdict is None else self.verdict.value,
            "decided_by": None if self.decided_by is None else self.decided_by.value,
            "mip": self.mip,
            "witness": self.witness,
            # only this section varies between identical runs
            "timings": self.timings,
        }


def bound_objective(net: Network, query: Query, mode: Mode, cfg: EngineConfig,
                    stats: Optional[MipStats] = None) -> ModeOutcome:
    """Bounds of the query objective in one mode."""
    started = time.monotonic()
    bounds = compute_all_bounds(query.objective_network(net), query.domain, mode, cfg.alpha, cfg.with_mode(mode), stats)
    lower, upper = bounds.output
    outcome = ModeOutcome(mode, float(lower[0]), float(upper[0]), time.monotonic() - started, layer_bounds=bounds)
    if query.prop is not None:
        outcome.verdict = query.prop.decide(outcome.lower, outcome.upper)
    logger.info("%s: objective in [%.6g, %.6g] (%.3fs)", mode.value, outcome.lower, outcome.upper, outcome.seconds)
    return outcome


def find_witness(net: Network, query: Query, seed: int, n: int = WITNESS_SAMPLES) -> Optional[Dict[str, Any]]:
    """Best sampled point against the property, if it violates it."""
    if query.prop is None:
        return None
    points, outputs = sample_outputs(query.objective_network(net), query.domain, n, seed)
    values = outputs[:, 0]
    index = int(np.argmax(values)) if query.prop.kind == PropertyKind.MAX_LEQ else int(np.argmin(values))
    if not query.prop.violated_by(float(values[index])):
        return None
    return {"point": points[index].tolist(), "value": float(values[index])}


def _load(net_path: str, query_path: str):
    net = load_network_file(net_path)
    return net, load_query_file(query_path, net.output_dim)


def run_modes(net: Network, query: Query, modes: Sequence[Mode], cfg: EngineConfig, stop_when_decided: bool = False,
              net_name: str = "", query_name: str = "", witness_seed: Optional[int] = None) -> Report:
    """Bound the objective in each of ``modes`` in order and fold the outcomes into a report."""
    stats = MipStats()
    report = Report(net_name, query_name, cfg.to_dict())
    started = time.monotonic()
    for mode in modes:
        outcome = bound_objective(net, query, mode, cfg, stats)
        report.outcomes.append(outcome)
        report.timings[mode.value] = outcome.seconds
        if outcome.verdict == Verdict.HOLDS and report.decided_by is None:
            report.decided_by = mode
            if stop_when_decided:
                break
    if query.prop is not None:
        report.verdict = Verdict.HOLDS if report.decided_by is not None else Verdict.UNKNOWN
        if report.verdict == Verdict.UNKNOWN and witness_seed is not None:
            report.witness = find_witness(net, query, witness_seed)
    report.mip = stats.to_dict()
    report.timings["total"] = time.monotonic() - started
    return report


def run_query(net_path: str, query_path: str, cfg: EngineConfig, witness_seed: Optional[int] = None) -> Report:
    """Bound and decide the query in the configured mode."""
    net, query = _load(net_path, query_path)
    return run_modes(net, query, [cfg.mode], cfg, net_name=net_path, query_name=query_path, witness_seed=witness_seed)


def run_cascade(net_path: str, query_path: str, cfg: EngineConfig, witness_seed: Optional[int] = None) -> Report:
    """Interval, Symbolic, MiniMIP, DeepMIP in turn, stopping at the first stage that proves the property."""
    net, query = _load(net_path, query_path)
    return run_modes(net, query, CASCADE, cfg, stop_when_decided=True, net_name=net_path, query_name=query_path,
                     witness_seed=witness_seed)


def compare(net_path: str, query_path: str, cfg: EngineConfig, witness_seed: Optional[int] = None) -> Report:
    """Every mode on the same query, for a side-by-side bound table."""
    net, query = _load(net_path, query_path)
    return run_modes(net, query, CASCADE, cfg, net_name=net_path, query_name=query_path, witness_seed=witness_seed)

