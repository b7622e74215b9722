import logging

import numpy as np
import pytest

from conftest import tiny_instances

from bpmip.engine.bounds import LayerBounds, compute_all_bounds, compute_ladder, interval_propagate
from bpmip.engine.config import Concretization, EngineConfig, Mode
from bpmip.engine.relaxation import AlphaPolicy
from bpmip.error_min.backsub import MipStats
from bpmip.errors import DimensionError, MissingBoundsError
from bpmip.network.model import Activation, AffineLayer, BoxDomain, Network
from bpmip.oracle.enumerate import enumerate_network_extremes
from bpmip.oracle.sampling import sample_outputs
from bpmip.utils import unit_box

ALL_MODES = [Mode.INTERVAL, Mode.SYMBOLIC, Mode.MINIMIP, Mode.DEEPMIP]


def assert_bounds(actual, lower, upper):
    np.testing.assert_allclose(actual[0], lower, atol=1e-6)
    np.testing.assert_allclose(actual[1], upper, atol=1e-6)


class TestExampleGolden:
    def test_interval(self, example_net, example_box):
        bounds = interval_propagate(example_net, example_box)
        assert_bounds(bounds.pre(1), [-2, -2, -1], [2, 2, 1])
        assert_bounds(bounds.post(1), [0, 0, 0], [2, 2, 1])
        assert_bounds(bounds.pre(2), [0, -2, -3], [4, 3, 2])
        assert bounds.output[1][0] == pytest.approx(9.0)

    def test_interval_mode_matches_interval_propagation(self, example_net, example_box):
        bounds = compute_all_bounds(example_net, example_box, Mode.INTERVAL)
        expected = interval_propagate(example_net, example_box)
        for i in range(example_net.depth + 1):
            assert_bounds(bounds.pre(i), *expected.pre(i))

    @pytest.mark.parametrize("policy", [AlphaPolicy.zero(), AlphaPolicy.crown()])
    def test_symbolic(self, example_net, example_box, policy):
        bounds = compute_all_bounds(example_net, example_box, Mode.SYMBOLIC, policy)
        assert_bounds(bounds.pre(2), [0, -2, -3], [3, 3, 2])
        assert bounds.output[1][0] == pytest.approx(6.6)

    def test_minimip(self, example_net, example_box, exact_cfg, zero_alpha):
        bounds = compute_all_bounds(example_net, example_box, Mode.MINIMIP, zero_alpha, exact_cfg)
        assert_bounds(bounds.pre(2), [0, -2, -3], [2, 3, 2])
        assert bounds.output[1][0] == pytest.approx(6.6)

    def test_deepmip(self, example_net, example_box, exact_cfg, zero_alpha):
        bounds = compute_all_bounds(example_net, example_box, Mode.DEEPMIP, zero_alpha, exact_cfg)
        assert bounds.output[1][0] == pytest.approx(6.2)

    def test_deepmip_with_mip_concretization(self, example_net, example_box, zero_alpha):
        cfg = EngineConfig(alpha=zero_alpha, mip_budget_ms=None, concretization=Concretization.MIP)
        bounds = compute_all_bounds(example_net, example_box, Mode.DEEPMIP, zero_alpha, cfg)
        assert bounds.output[1][0] == pytest.approx(6.0)

    def test_ladder_returns_requested_modes(self, example_net, example_box, exact_cfg):
        timings = {}
        ladder = compute_ladder(example_net, example_box, [Mode.DEEPMIP, Mode.INTERVAL], cfg=exact_cfg,
                                timings=timings)
        assert set(ladder) == {Mode.INTERVAL, Mode.DEEPMIP}
        assert set(timings) == {Mode.INTERVAL, Mode.DEEPMIP}
        assert timings[Mode.INTERVAL] <= timings[Mode.DEEPMIP]
        assert ladder[Mode.DEEPMIP].output[1][0] == pytest.approx(6.2)


class TestSoundness:
    @staticmethod
    def check(net, dom, cfg):
        low, high = enumerate_network_extremes(net, dom)
        ladder = compute_ladder(net, dom, ALL_MODES, cfg=cfg)
        for mode in ALL_MODES:
            lower, upper = ladder[mode].output
            assert lower[0] <= low + 1e-7, mode
            assert upper[0] >= high - 1e-7, mode
        return ladder

    @staticmethod
    def check_ordering(net, ladder, slack=1e-9):
        for cheap, rich in zip(ALL_MODES, ALL_MODES[1:]):
            for i in range(1, net.depth + 1):
                rich_lower, rich_upper = ladder[rich].pre(i)
                cheap_lower, cheap_upper = ladder[cheap].pre(i)
                assert np.all(rich_upper <= cheap_upper + slack), (cheap, rich, i)
                assert np.all(rich_lower >= cheap_lower - slack), (cheap, rich, i)

    def test_random_networks(self, exact_cfg):
        for net, dom in tiny_instances(15, seed=11, max_hidden_layers=2, max_width=4):
            ladder = self.check(net, dom, exact_cfg)
            self.check_ordering(net, ladder)

    @pytest.mark.slow
    def test_random_networks_sweep(self, exact_cfg):
        for net, dom in tiny_instances(200, seed=2024):
            ladder = self.check(net, dom, exact_cfg)
            self.check_ordering(net, ladder)

    @pytest.mark.parametrize("policy", [AlphaPolicy.zero(), AlphaPolicy.crown()], ids=["zero", "crown"])
    def test_unnested_modes_are_sound_and_ordered(self, policy):
        cfg = EngineConfig(alpha=policy, mip_budget_ms=None, nest_modes=False)
        for net, dom in tiny_instances(15, seed=17, max_hidden_layers=2, max_width=4):
            ladder = self.check(net, dom, cfg)
            self.check_ordering(net, ladder)

    @pytest.mark.slow
    @pytest.mark.parametrize("policy", [AlphaPolicy.zero(), AlphaPolicy.crown()], ids=["zero", "crown"])
    def test_unnested_modes_sweep(self, policy):
        cfg = EngineConfig(alpha=policy, mip_budget_ms=None, nest_modes=False)
        for net, dom in tiny_instances(200, seed=2025):
            ladder = self.check(net, dom, cfg)
            self.check_ordering(net, ladder)

    @staticmethod
    def check_samples(net, dom, cfg, samples):
        bounds = compute_all_bounds(net, dom, Mode.DEEPMIP, cfg=cfg)
        _, outputs = sample_outputs(net, dom, samples, seed=1)
        assert np.all(outputs[:, 0] >= bounds.output[0][0] - 1e-7)
        assert np.all(outputs[:, 0] <= bounds.output[1][0] + 1e-7)

    def test_hidden_bounds_contain_samples(self, exact_cfg):
        for net, dom in tiny_instances(5, seed=5, max_hidden_layers=2, max_width=4):
            self.check_samples(net, dom, exact_cfg, 10_000)

    @pytest.mark.slow
    def test_bounds_contain_samples_sweep(self, exact_cfg):
        for net, dom in tiny_instances(100, seed=6):
            self.check_samples(net, dom, exact_cfg, 10_000)

    def test_expired_neuron_budget_stays_sound(self):
        net, dom = next(tiny_instances(1, seed=3, max_hidden_layers=2, max_width=5))
        stats = MipStats()
        cfg = EngineConfig(neuron_budget_ms=1e-6)
        bounds = compute_all_bounds(net, dom, Mode.DEEPMIP, cfg=cfg, stats=stats)
        low, high = enumerate_network_extremes(net, dom)
        assert bounds.output[0][0] <= low + 1e-7
        assert bounds.output[1][0] >= high - 1e-7
        assert stats.fallbacks > 0

    def test_workers_do_not_change_bounds(self, exact_cfg):
        net, dom = next(tiny_instances(1, seed=9, max_hidden_layers=3, max_width=6))
        single = compute_all_bounds(net, dom, Mode.DEEPMIP, cfg=exact_cfg)
        threaded = compute_all_bounds(net, dom, Mode.DEEPMIP, cfg=EngineConfig(alpha=exact_cfg.alpha,
                                                                               mip_budget_ms=None, workers=3))
        for i in range(net.depth + 1):
            np.testing.assert_allclose(threaded.pre(i)[0], single.pre(i)[0], atol=1e-12)
            np.testing.assert_allclose(threaded.pre(i)[1], single.pre(i)[1], atol=1e-12)


class TestStableNetwork:
    def test_exact_on_an_affine_region(self, exact_cfg):
        # every neuron stays active over the box, so the network is affine there
        net = Network((
            AffineLayer([[1.0, 2.0], [0.5, 1.0]], [1.0, 1.0], Activation.RELU),
            AffineLayer([[1.0, -1.0], [2.0, 1.0]], [10.0, 0.0], Activation.RELU),
            AffineLayer([[1.0, -2.0]], [0.0], Activation.IDENTITY),
        ), 2)
        dom = BoxDomain([0.0, 0.0], [1.0, 1.0])
        low, high = enumerate_network_extremes(net, dom)
        ladder = compute_ladder(net, dom, ALL_MODES, cfg=exact_cfg)
        for mode in (Mode.SYMBOLIC, Mode.MINIMIP, Mode.DEEPMIP):
            lower, upper = ladder[mode].output
            assert lower[0] == pytest.approx(low, abs=1e-7)
            assert upper[0] == pytest.approx(high, abs=1e-7)
        assert ladder[Mode.INTERVAL].output[1][0] > high + 1e-3


class TestLayerBounds:
    def test_missing_layer(self):
        bounds = LayerBounds.start(unit_box(2))
        with pytest.raises(MissingBoundsError):
            bounds.pre(1)

    def test_crossed_bounds_are_repaired(self):
        bounds = LayerBounds.start(unit_box(1))
        bounds.append([1.0 + 1e-15], [1.0], relu=True)
        lower, upper = bounds.pre(1)
        assert upper[0] == lower[0]

    def test_widely_crossed_bounds_keep_their_hull(self, caplog):
        bounds = LayerBounds.start(unit_box(2))
        with caplog.at_level(logging.WARNING, logger="bpmip.engine.bounds"):
            bounds.append([2.0, 0.0], [1.0, 1.0], relu=True)
        lower, upper = bounds.pre(1)
        np.testing.assert_array_equal(lower, [1.0, 0.0])
        np.testing.assert_array_equal(upper, [2.0, 1.0])
        assert "cross" in caplog.text

    def test_domain_dimension(self, example_net):
        with pytest.raises(DimensionError):
            compute_all_bounds(example_net, unit_box(2), Mode.SYMBOLIC)

    def test_unstable_count(self, example_net, example_box):
        assert interval_propagate(example_net, example_box).unstable_count(example_net) == 5
