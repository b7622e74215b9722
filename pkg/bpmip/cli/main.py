# pylint: disable=line-too-long, function-name-too-long
"""
Command-line entry point.

    bpmip verify --network net.json --query q.json [--mode deepmip|cascade ...] [--compare]
    bpmip suite --network net.json --data points.json --epsilon 0.02
    bpmip export-mip --network net.json --query q.json --layer 2 --out e2.lp

Exit codes: 0 the property holds (or no property was given), 1 unknown, 2 bad input or config.
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from dotenv import find_dotenv, load_dotenv
from rich.console import Console
from rich.table import Table

from .. import __version__
from ..engine.bounds import compute_all_bounds
from ..engine.config import EngineConfig, EngineConfigFactory, Mode
from ..engine.relaxation import Side
from ..error_min.backsub import back_substitute_neuron, partial_mip_problem
from ..errors import BpmipError, ConfigurationError
from ..mip.lp_export import export_lp_text
from ..network.io import load_network_file
from ..oracle.enumerate import enumerate_network_extremes
from ..oracle.sampling import sample_extremes
from ..recorder import ReportRecorder, write_json_atomic
from .query import Report, compare, load_query_file, run_cascade, run_query
from .suite import run_robustness_suite

logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 2
MODE_CHOICES = [m.value for m in Mode]


def _add_engine_flags(parser: argparse.ArgumentParser, with_mode: bool = True):
    if with_mode:
        parser.add_argument("--mode", choices=MODE_CHOICES + ["cascade"], default=None,
                            help="bounding mode (default from config, deepmip); cascade tries the cheap modes first")
    parser.add_argument("--alpha", default=None, help="lower-edge slope policy: crown | zero | one | file:PATH")
    parser.add_argument("--mip-budget-ms", type=float, default=None, help="time budget per MIP solve")
    parser.add_argument("--neuron-budget-ms", type=float, default=None, help="wall-clock budget per neuron bound")
    parser.add_argument("--concretization", choices=["box", "mip"], default=None,
                        help="box: MIP only one ReLU from the input; mip: DeepMIP solves a partial MIP at every depth")
    parser.add_argument("--workers", type=int, default=None, help="worker threads")
    parser.add_argument("--config", default=None, help="YAML engine config file")
    parser.add_argument("--preset", choices=["smoke", "desk", "thorough"], default=None, help="recommended config preset")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bpmip", description="Bound propagation with MIP-refined back-substitution for ReLU networks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="logging level (default BPMIP_LOG_LEVEL or WARNING)")
    subparsers = parser.add_subparsers(dest="command", metavar="{verify,suite,export-mip}")

    verify = subparsers.add_parser("verify", help="bound a query objective and decide its property")
    verify.add_argument("--network", required=True)
    verify.add_argument("--query", required=True)
    _add_engine_flags(verify)
    verify.add_argument("--compare", action="store_true", help="run every mode and print a comparison table")
    verify.add_argument("--report", default=None, help="write the JSON report here")
    verify.add_argument("--output-bounds", action="store_true", help="include per-layer neuron bounds in the report")
    verify.add_argument("--seed", type=int, default=None, help="sample for a witness when the verdict is unknown")

    suite = subparsers.add_parser("suite", help="epsilon-robustness over a labelled dataset")
    suite.add_argument("--network", required=True)
    suite.add_argument("--data", required=True)
    suite.add_argument("--epsilon", type=float, required=True)
    suite.add_argument("--modes", nargs="+", choices=MODE_CHOICES, default=None)
    _add_engine_flags(suite, with_mode=False)
    suite.add_argument("--query-timeout-s", type=float, default=None)
    suite.add_argument("--output-dir", default=None, help="directory for the jsonlines trace of per-point rows")
    suite.add_argument("--report", default=None, help="write the JSON summary here")
    suite.add_argument("--progress", action="store_true")

    export = subparsers.add_parser("export-mip", help="write the MIP of one back-substitution depth as CPLEX LP text")
    export.add_argument("--network", required=True)
    export.add_argument("--query", required=True)
    export.add_argument("--layer", type=int, required=True, help="hidden layer whose ReLUs the problem covers")
    export.add_argument("--kind", choices=["error", "direct"], default="error",
                        help="error: the error term of the layer; direct: the form one ReLU deep at that layer")
    export.add_argument("--side", choices=["upper", "lower"], default="upper")
    export.add_argument("--out", required=True)
    _add_engine_flags(export)

    oracle = subparsers.add_parser("oracle")
    oracle.add_argument("--network", required=True)
    oracle.add_argument("--query", required=True)
    oracle.add_argument("--samples", type=int, default=10000)
    oracle.add_argument("--seed", type=int, default=0)
    return parser


def build_config(args: argparse.Namespace) -> EngineConfig:
    overrides: Dict[str, Any] = {
        "alpha": args.alpha,
        "mip_budget_ms": args.mip_budget_ms,
        "neuron_budget_ms": args.neuron_budget_ms,
        "concretization": args.concretization,
        "workers": args.workers,
    }
    mode = getattr(args, "mode", None)
    if mode is not None and mode != "cascade":
        overrides["mode"] = mode
    seed = getattr(args, "seed", None)
    if seed is not None:
        overrides["seed"] = seed
    if args.preset:
        base = EngineConfigFactory.create_from_config({"engine_preset": args.preset})
        if args.config:
            base = EngineConfig.from_yaml(args.config, base)
        return EngineConfig.from_env(base).merged(overrides)
    return EngineConfigFactory.create(args.config, overrides)


def _print_report(report: Report, console: Console):
    table = Table(title="objective bounds")
    table.add_column("mode")
    table.add_column("lower", justify="right")
    table.add_column("upper", justify="right")
    table.add_column("verdict")
    table.add_column("time [s]", justify="right")
    for o in report.outcomes:
        table.add_row(o.mode.value, f"{o.lower:.6g}", f"{o.upper:.6g}", "-" if o.verdict is None else o.verdict.value,
                      f"{o.seconds:.3f}")
    console.print(table)
    if report.verdict is not None:
        decided = f" (decided by {report.decided_by.value})" if report.decided_by is not None else ""
        console.print(f"verdict: [bold]{report.verdict.value}[/bold]{decided}")
    if report.witness is not None:
        console.print(f"sampled witness value {report.witness['value']:.6g}")


def cmd_verify(args: argparse.Namespace, console: Console) -> int:
    cfg = build_config(args)
    if args.compare:
        report = compare(args.network, args.query, cfg, args.seed)
    elif args.mode == "cascade":
        report = run_cascade(args.network, args.query, cfg, args.seed)
    else:
        report = run_query(args.network, args.query, cfg, args.seed)
    _print_report(report, console)
    if args.report:
        write_json_atomic(args.report, report.to_dict(include_layers=args.output_bounds))
    return report.exit_code


def cmd_suite(args: argparse.Namespace, console: Console) -> int:
    cfg = build_config(args)
    modes = None if args.modes is None else [Mode(m) for m in args.modes]
    recorder = ReportRecorder(args.output_dir) if args.output_dir else None
    summary = run_robustness_suite(args.network, args.data, args.epsilon, cfg, modes, args.workers,
                                   args.query_timeout_s, recorder, args.progress)
    summary.render(console)
    if args.report:
        write_json_atomic(args.report, summary.to_dict())
    return 0


def cmd_export(args: argparse.Namespace, console: Console) -> int:
    cfg = build_config(args)
    net = load_network_file(args.network)
    query = load_query_file(args.query, net.output_dim)
    objective = query.objective_network(net)
    if not 1 <= args.layer < objective.depth:
        raise ConfigurationError(f"--layer must name a hidden layer in 1..{objective.depth - 1}")
    side = Side(args.side)
    bounds = compute_all_bounds(objective, query.domain, cfg.mode, cfg.alpha, cfg)
    # trace the symbolic back-substitution of the objective so every depth is visited
    trace = back_substitute_neuron(objective, bounds, objective.depth, 0, side, Mode.SYMBOLIC, cfg.alpha, cfg, trace=True)
    step = next(s for s in trace.steps if s.depth == args.layer)
    if args.kind == "error":
        problem = step.error_term.as_problem
    else:
        problem = partial_mip_problem(step.form, objective, bounds, side)
    text = export_lp_text(problem)
    directory = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(directory, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(text)
    console.print(f"wrote {args.out} ({len(problem.relu_terms)} ReLU terms, {problem.n_vars} variables)")
    return 0


def cmd_oracle(args: argparse.Namespace, console: Console) -> int:
    net = load_network_file(args.network)
    query = load_query_file(args.query, net.output_dim)
    objective = query.objective_network(net)
    low, high = enumerate_network_extremes(objective, query.domain)
    seen_low, seen_high = sample_extremes(objective, query.domain, args.samples, args.seed)
    console.print(json.dumps({"min": low, "max": high, "sampled_min": seen_low, "sampled_max": seen_high}), soft_wrap=True)
    return 0


COMMANDS = {
    "verify": cmd_verify,
    "suite": cmd_suite,
    "export-mip": cmd_export,
    "oracle": cmd_oracle,
}


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv(find_dotenv(usecwd=True))
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (args.log_level or os.getenv("BPMIP_LOG_LEVEL") or "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    )
    if args.command is None:
        parser.print_help()
        return EXIT_INPUT_ERROR
    console = Console()
    try:
        return COMMANDS[args.command](args, console)
    except BpmipError as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
