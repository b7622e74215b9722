import json

import numpy as np
import pytest

from bpmip.cli.main import build_parser, main
from bpmip.cli.query import (CASCADE, Property, PropertyKind, Query, Verdict, compare, run_cascade, run_query)
from bpmip.cli.suite import margin_network, run_robustness_suite
from bpmip.engine.config import Concretization, EngineConfig, Mode
from bpmip.errors import DimensionError, QueryError
from bpmip.mip.lp_export import check_lp_text
from bpmip.network.io import dump_network
from bpmip.network.model import forward_eval
from bpmip.recorder import ReportRecorder, write_json_atomic
from bpmip.utils import random_network, toy_suite


@pytest.fixture
def cfg(exact_cfg):
    return exact_cfg


@pytest.fixture(scope="module")
def toy():
    return toy_suite(seed=0, n_points=8)


class TestQuery:
    def test_defaults_to_first_output(self):
        query = Query.from_dict({"domain": {"lower": [0, 0], "upper": [1, 1]}}, output_dim=3)
        np.testing.assert_array_equal(query.coeffs, [1, 0, 0])
        assert query.prop is None

    def test_center_domain(self):
        query = Query.from_dict({"domain": {"center": [0.5, 0.0], "epsilon": 0.1, "clip": [0, 1]},
                                 "property": {"kind": "min_geq", "threshold": 0}}, output_dim=1)
        np.testing.assert_allclose(query.domain.lower, [0.4, 0.0])
        assert query.prop == Property(PropertyKind.MIN_GEQ, 0.0)

    def test_objective_width(self):
        with pytest.raises(DimensionError):
            Query.from_dict({"domain": {"lower": [0], "upper": [1]}, "objective": {"coeffs": [1, 1]}}, output_dim=1)

    def test_bad_property(self):
        with pytest.raises(QueryError):
            Query.from_dict({"domain": {"lower": [0], "upper": [1]}, "property": {"kind": "equals", "threshold": 1}},
                            output_dim=1)
        with pytest.raises(QueryError):
            Query.from_dict({"objective": {"coeffs": [1]}}, output_dim=1)

    def test_property_decision(self):
        prop = Property(PropertyKind.MAX_LEQ, 6.5)
        assert prop.decide(0.0, 6.2) == Verdict.HOLDS
        assert prop.decide(0.0, 6.6) == Verdict.UNKNOWN
        assert prop.violated_by(6.6) and not prop.violated_by(6.0)


class TestVerdicts:
    def test_deepmip_holds(self, example_files, cfg):
        net_path, make_query = example_files
        report = run_query(net_path, make_query(6.5), cfg)
        assert report.verdict == Verdict.HOLDS
        assert report.exit_code == 0
        assert report.outcome(Mode.DEEPMIP).upper == pytest.approx(6.2)

    def test_mip_concretization_decides_tighter_threshold(self, example_files, cfg):
        net_path, make_query = example_files
        query = make_query(6.1)
        assert run_query(net_path, query, cfg).verdict == Verdict.UNKNOWN
        tighter = EngineConfig(alpha=cfg.alpha, mip_budget_ms=None, concretization=Concretization.MIP)
        assert run_query(net_path, query, tighter).verdict == Verdict.HOLDS

    def test_no_property(self, example_files, cfg):
        net_path, make_query = example_files
        report = run_query(net_path, make_query(), cfg)
        assert report.verdict is None
        assert report.exit_code == 0

    def test_min_geq(self, example_files, cfg):
        net_path, make_query = example_files
        report = run_cascade(net_path, make_query(-0.5, kind="min_geq"), cfg)
        assert report.verdict == Verdict.HOLDS
        assert report.decided_by == Mode.INTERVAL


class TestCascade:
    @pytest.mark.parametrize("threshold, decided_by, stages", [
        (6.5, Mode.DEEPMIP, 4),
        (7.0, Mode.SYMBOLIC, 2),
        (12.0, Mode.INTERVAL, 1),
    ])
    def test_decided_stage(self, example_files, cfg, threshold, decided_by, stages):
        net_path, make_query = example_files
        report = run_cascade(net_path, make_query(threshold), cfg)
        assert report.verdict == Verdict.HOLDS
        assert report.decided_by == decided_by
        assert len(report.outcomes) == stages

    def test_unknown_runs_every_stage(self, example_files, cfg):
        net_path, make_query = example_files
        report = run_cascade(net_path, make_query(5.0), cfg, witness_seed=0)
        assert report.verdict == Verdict.UNKNOWN
        assert report.exit_code == 1
        assert [o.mode for o in report.outcomes] == list(CASCADE)
        assert report.witness["value"] == pytest.approx(6.0)

    def test_compare_keeps_every_mode(self, example_files, cfg):
        net_path, make_query = example_files
        report = compare(net_path, make_query(7.0), cfg)
        uppers = [report.outcome(mode).upper for mode in CASCADE]
        assert uppers == pytest.approx([9.0, 6.6, 6.6, 6.2])
        assert report.decided_by == Mode.SYMBOLIC


class TestMain:
    def test_verify_writes_a_deterministic_report(self, example_files, tmp_path):
        net_path, make_query = example_files
        query = make_query(6.5)
        reports = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            assert main(["verify", "--network", net_path, "--query", query, "--alpha", "zero", "--report", str(out)]) == 0
            data = json.loads(out.read_text())
            data.pop("timings")
            reports.append(data)
        assert reports[0] == reports[1]
        assert reports[0]["verdict"] == "holds"
        assert reports[0]["bounds"]["deepmip"]["upper"] == pytest.approx(6.2)

    def test_output_bounds(self, example_files, tmp_path):
        net_path, make_query = example_files
        out = tmp_path / "report.json"
        assert main(["verify", "--network", net_path, "--query", make_query(7.0), "--mode", "symbolic",
                     "--output-bounds", "--report", str(out)]) == 0
        layers = json.loads(out.read_text())["bounds"]["symbolic"]["layers"]
        assert len(layers) == 4
        assert layers[2]["upper"] == pytest.approx([3.0, 3.0, 2.0])

    def test_cascade_unknown_exit_code(self, example_files):
        net_path, make_query = example_files
        assert main(["verify", "--network", net_path, "--query", make_query(5.0), "--mode", "cascade"]) == 1

    def test_input_errors_exit_two(self, example_files, tmp_path):
        net_path, make_query = example_files
        broken = tmp_path / "broken.json"
        broken.write_text("{")
        assert main(["verify", "--network", str(broken), "--query", make_query(6.5)]) == 2
        assert main(["verify", "--network", net_path, "--query", str(tmp_path / "absent.json")]) == 2
        assert main(["verify", "--network", net_path, "--query", make_query(6.5), "--alpha", "steep"]) == 2
        assert main([]) == 2

    def test_export_error_term(self, example_files, tmp_path):
        net_path, make_query = example_files
        out = tmp_path / "lp" / "e2.lp"
        assert main(["export-mip", "--network", net_path, "--query", make_query(), "--layer", "2",
                     "--alpha", "zero", "--out", str(out)]) == 0
        summary = check_lp_text(out.read_text())
        assert summary.binaries == 3
        assert summary.constraints == 12

    def test_export_direct_and_bad_layer(self, example_files, tmp_path):
        net_path, make_query = example_files
        out = tmp_path / "direct.lp"
        assert main(["export-mip", "--network", net_path, "--query", make_query(), "--layer", "1", "--kind", "direct",
                     "--out", str(out)]) == 0
        check_lp_text(out.read_text())
        assert main(["export-mip", "--network", net_path, "--query", make_query(), "--layer", "3",
                     "--out", str(out)]) == 2

    def test_hidden_oracle(self, example_files, capsys):
        net_path, make_query = example_files
        assert "oracle" not in build_parser().format_help()
        assert main(["oracle", "--network", net_path, "--query", make_query(), "--samples", "50"]) == 0
        extremes = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert extremes["max"] == pytest.approx(6.0)
        assert extremes["min"] == pytest.approx(0.0, abs=1e-9)
        assert extremes["sampled_max"] <= extremes["max"] + 1e-9

    def test_suite_command(self, toy, tmp_path):
        net, dataset = toy
        net_path = tmp_path / "toy.json"
        net_path.write_text(dump_network(net))
        data_path = tmp_path / "points.json"
        write_json_atomic(str(data_path), dataset)
        report = tmp_path / "suite.json"
        assert main(["suite", "--network", str(net_path), "--data", str(data_path), "--epsilon", "0.01",
                     "--modes", "interval", "symbolic", "--report", str(report), "--output-dir",
                     str(tmp_path / "out")]) == 0
        summary = json.loads(report.read_text())
        assert set(summary["modes"]) == {"interval", "symbolic"}
        rows = ReportRecorder(str(tmp_path / "out")).read_rows()
        assert len(rows) == len(dataset["points"])


class TestSuite:
    def test_solved_and_time_ordering(self, toy):
        net, dataset = toy
        summary = run_robustness_suite(net, dataset, 0.01, EngineConfig(mip_budget_ms=100.0))
        assert summary.evaluated > 0
        solved = [summary.solved(mode) for mode in CASCADE]
        assert solved == sorted(solved)
        times = [summary.mean_seconds(mode) for mode in CASCADE]
        assert times[0] < times[1] < times[2] <= times[3]

    @pytest.mark.slow
    def test_full_toy_suite(self):
        net, dataset = toy_suite(seed=0, n_points=50)
        summary = run_robustness_suite(net, dataset, 0.02, workers=2)
        solved = [summary.solved(mode) for mode in CASCADE]
        assert solved == sorted(solved)

    def test_zero_epsilon_proves_every_correct_point(self, toy):
        net, dataset = toy
        summary = run_robustness_suite(net, dataset, 0.0, modes=[Mode.INTERVAL, Mode.SYMBOLIC])
        assert summary.solved(Mode.INTERVAL) == summary.evaluated
        assert summary.solved(Mode.SYMBOLIC) == summary.evaluated

    def test_misclassified_points_are_skipped(self, toy, tmp_path):
        net, dataset = toy
        x = dataset["points"][0]["x"]
        predicted = int(np.argmax(forward_eval(net, x)))
        data = {"valid_range": [0.0, 1.0], "points": [{"x": x, "label": (predicted + 1) % 3},
                                                        {"x": x, "label": predicted}]}
        recorder = ReportRecorder(str(tmp_path))
        summary = run_robustness_suite(net, data, 0.0, modes=[Mode.INTERVAL], recorder=recorder)
        assert summary.total == 2
        assert summary.skipped == 1
        assert summary.evaluated == 1
        assert len(recorder.read_rows()) == 2

    def test_every_point_gets_a_report(self, toy, tmp_path):
        net, dataset = toy
        data = {"valid_range": dataset["valid_range"], "points": dataset["points"][:3]}
        recorder = ReportRecorder(str(tmp_path))
        run_robustness_suite(net, data, 0.01, modes=[Mode.INTERVAL], recorder=recorder)
        for index in range(3):
            path = tmp_path / "reports" / f"point-{index}.json"
            report = json.loads(path.read_text())
            assert report["index"] == index
            assert report["epsilon"] == pytest.approx(0.01)
            assert "interval" in report["solved"] or report["skipped"]

    def test_margin_network(self, toy):
        net, dataset = toy
        x = dataset["points"][1]["x"]
        logits = forward_eval(net, x)
        margins = forward_eval(margin_network(net, 2), x)
        np.testing.assert_allclose(margins, [logits[2] - logits[0], logits[2] - logits[1]], atol=1e-12)

    def test_bad_inputs(self, toy):
        net, dataset = toy
        with pytest.raises(QueryError):
            run_robustness_suite(net, dataset, -0.1)
        with pytest.raises(QueryError):
            run_robustness_suite(random_network(np.random.default_rng(0), 16, [4]), dataset, 0.01)
        with pytest.raises(QueryError):
            run_robustness_suite(net, {"points": [{"x": [0.0]}]}, 0.01)
