import json

import numpy as np
import pytest

from bpmip.engine.config import EngineConfig
from bpmip.engine.relaxation import AlphaPolicy
from bpmip.network.io import network_to_dict
from bpmip.utils import example_network, random_box, random_network, unit_box


@pytest.fixture
def example_net():
    return example_network()


@pytest.fixture
def example_box():
    return unit_box(3)


@pytest.fixture
def zero_alpha():
    return AlphaPolicy.zero()


@pytest.fixture
def exact_cfg():
    # no wall-clock budgets, so MIP outcomes do not depend on machine speed
    return EngineConfig(alpha=AlphaPolicy.zero(), mip_budget_ms=None)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for var in ("BPMIP_MODE", "BPMIP_ALPHA", "BPMIP_MIP_BUDGET_MS", "BPMIP_NEURON_BUDGET_MS",
                "BPMIP_CONCRETIZATION", "BPMIP_WORKERS", "BPMIP_LOG_LEVEL"):
        monkeypatch.delenv(var, raising=False)


@pytest.fixture
def example_files(tmp_path, example_net):
    """Network file of the example network plus a factory for query files over [-1, 1]^3."""
    net_path = tmp_path / "net.json"
    net_path.write_text(json.dumps(network_to_dict(example_net)))

    def make_query(threshold=None, kind="max_leq", name="query.json"):
        query = {"domain": {"lower": [-1, -1, -1], "upper": [1, 1, 1]}}
        if threshold is not None:
            query["property"] = {"kind": kind, "threshold": threshold}
        path = tmp_path / name
        path.write_text(json.dumps(query))
        return str(path)

    return str(net_path), make_query


def tiny_instances(count, seed, max_input=4, max_hidden_layers=3, max_width=6):
    """Random small networks with random boxes, reproducible per seed."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        input_dim = int(rng.integers(1, max_input + 1))
        widths = [int(rng.integers(1, max_width + 1)) for _ in range(int(rng.integers(1, max_hidden_layers + 1)))]
        net = random_network(rng, input_dim, widths)
        yield net, random_box(rng, input_dim)
