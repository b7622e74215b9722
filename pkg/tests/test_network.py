import json

import numpy as np
import pytest

from bpmip.errors import DimensionError, NetworkParseError, NetworkShapeError, NetworkValueError
from bpmip.network.io import dump_network, load_network, load_network_file, network_to_dict
from bpmip.network.model import (Activation, AffineLayer, BoxDomain, Network, forward_eval, forward_eval_batch,
                                 forward_trace)
from bpmip.utils import random_network


class TestForward:
    def test_example_point(self, example_net):
        trace = forward_trace(example_net, [1, -1, 1])
        np.testing.assert_allclose(trace.pre[1], [0, 2, 1])
        np.testing.assert_allclose(trace.post[1], [0, 2, 1])
        np.testing.assert_allclose(trace.pre[2], [2, 3, 1])
        np.testing.assert_allclose(trace.post[2], [2, 3, 1])
        np.testing.assert_allclose(trace.output, [6])

    def test_origin(self, example_net):
        np.testing.assert_allclose(forward_eval(example_net, [0, 0, 0]), [0])

    def test_batch_matches_single(self, rng):
        net = random_network(rng, 3, [4, 5], output_dim=2)
        points = rng.uniform(-1, 1, size=(20, 3))
        batch = forward_eval_batch(net, points)
        for point, row in zip(points, batch):
            np.testing.assert_allclose(forward_eval(net, point), row, atol=1e-12)

    def test_wrong_length(self, example_net):
        with pytest.raises(DimensionError):
            forward_eval(example_net, [0, 0])

    def test_objective_folding(self, rng):
        net = random_network(rng, 2, [3], output_dim=3)
        folded = net.with_objective([1.0, -2.0, 0.5], constant=3.0)
        point = rng.uniform(-1, 1, size=2)
        expected = np.array([1.0, -2.0, 0.5]) @ forward_eval(net, point) + 3.0
        np.testing.assert_allclose(forward_eval(folded, point), [expected], atol=1e-12)
        assert folded.output_dim == 1

    def test_output_map_width_checked(self, example_net):
        with pytest.raises(DimensionError):
            example_net.with_output_map(np.ones((2, 3)))


class TestNetworkShape:
    def test_example_dims(self, example_net):
        assert example_net.depth == 3
        assert [example_net.width(i) for i in range(4)] == [3, 3, 3, 1]
        assert example_net.is_relu_layer(1) and example_net.is_relu_layer(2)
        assert not example_net.is_relu_layer(3)

    def test_last_layer_must_be_identity(self):
        with pytest.raises(NetworkShapeError):
            Network((AffineLayer([[1.0]], [0.0], Activation.RELU),), 1)

    def test_hidden_layer_must_be_relu(self):
        layers = (AffineLayer([[1.0]], [0.0], Activation.IDENTITY), AffineLayer([[1.0]], [0.0], Activation.IDENTITY))
        with pytest.raises(NetworkShapeError):
            Network(layers, 1)

    def test_non_finite_weight(self):
        with pytest.raises(NetworkValueError):
            Network((AffineLayer([[np.inf]], [0.0], Activation.IDENTITY),), 1)


class TestLoading:
    def test_round_trip_is_idempotent(self, rng):
        net = random_network(rng, 3, [4, 2], output_dim=2)
        text = dump_network(net)
        assert load_network(text) == net
        assert dump_network(load_network(text)) == text

    def test_malformed_json(self):
        with pytest.raises(NetworkParseError):
            load_network("{not json")

    def test_missing_keys(self):
        with pytest.raises(NetworkParseError):
            load_network(json.dumps({"layers": []}))

    def test_column_mismatch_names_layer(self, example_net):
        data = network_to_dict(example_net)
        data["layers"][1]["weights"][0] = [1, 1]
        with pytest.raises(NetworkShapeError) as info:
            load_network(json.dumps(data))
        assert info.value.layer == 2

    def test_nan_weight(self, example_net):
        text = json.dumps(network_to_dict(example_net)).replace("[1.0, 1.0, 1.0]", "[1.0, NaN, 1.0]")
        with pytest.raises(NetworkValueError):
            load_network(text)

    def test_unknown_activation(self, example_net):
        data = network_to_dict(example_net)
        data["layers"][0]["activation"] = "tanh"
        with pytest.raises(NetworkParseError):
            load_network(json.dumps(data))

    def test_missing_file(self, tmp_path):
        with pytest.raises(NetworkParseError):
            load_network_file(str(tmp_path / "absent.json"))


class TestBoxDomain:
    def test_inverted_box(self):
        with pytest.raises(DimensionError):
            BoxDomain([1.0, 0.0], [0.0, 1.0])

    def test_from_center_clipped(self):
        box = BoxDomain.from_center([0.05, 0.5], 0.1, clip=(0.0, 1.0))
        np.testing.assert_allclose(box.lower, [0.0, 0.4])
        np.testing.assert_allclose(box.upper, [0.15, 0.6])

    def test_zero_epsilon_is_a_point(self):
        box = BoxDomain.from_center([0.3, 0.7], 0.0)
        np.testing.assert_array_equal(box.lower, box.upper)
        assert box.contains([0.3, 0.7])

    def test_negative_epsilon(self):
        with pytest.raises(DimensionError):
            BoxDomain.from_center([0.0], -0.1)
