import pytest
import yaml

from bpmip.engine.config import Concretization, EngineConfig, EngineConfigFactory, Mode, modes_up_to
from bpmip.engine.relaxation import AlphaKind
from bpmip.errors import ConfigurationError


@pytest.fixture
def yaml_config(tmp_path):
    def write(data):
        path = tmp_path / "engine.yaml"
        path.write_text(yaml.safe_dump(data))
        return str(path)

    return write


class TestEngineConfig:
    def test_defaults(self):
        cfg = EngineConfig()
        assert cfg.mode == Mode.DEEPMIP
        assert cfg.alpha.kind == AlphaKind.CROWN
        assert cfg.mip_budget_ms == 500.0
        assert cfg.concretization == Concretization.BOX
        assert cfg.workers == 1

    def test_from_dict_coerces(self):
        cfg = EngineConfig.from_dict({"mode": "MiniMIP", "alpha": "zero", "workers": "4", "mip_budget_ms": None,
                                      "concretization": "mip", "nest_modes": "false"})
        assert cfg.mode == Mode.MINIMIP
        assert cfg.alpha.kind == AlphaKind.ZERO
        assert cfg.workers == 4
        assert cfg.mip_budget_ms is None
        assert cfg.concretization == Concretization.MIP
        assert cfg.nest_modes is False

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError):
            EngineConfig.from_dict({"modes": "deepmip"})

    def test_bad_values(self):
        with pytest.raises(ConfigurationError):
            EngineConfig.from_dict({"mode": "exhaustive"})
        with pytest.raises(ConfigurationError):
            EngineConfig.from_dict({"workers": "many"})
        with pytest.raises(ConfigurationError):
            EngineConfig(workers=0)
        with pytest.raises(ConfigurationError):
            EngineConfig(mip_budget_ms=-1.0)

    def test_to_dict(self):
        data = EngineConfig().to_dict()
        assert data["mode"] == "deepmip"
        assert data["alpha"] == "crown"
        assert data["concretization"] == "box"

    def test_yaml_with_engine_section(self, yaml_config):
        cfg = EngineConfig.from_yaml(yaml_config({"engine": {"mode": "symbolic", "mip_budget_ms": 50}}))
        assert cfg.mode == Mode.SYMBOLIC
        assert cfg.mip_budget_ms == 50.0

    def test_yaml_must_be_a_mapping(self, yaml_config):
        with pytest.raises(ConfigurationError):
            EngineConfig.from_yaml(yaml_config(["mode", "symbolic"]))

    def test_env(self, monkeypatch):
        monkeypatch.setenv("BPMIP_MODE", "interval")
        monkeypatch.setenv("BPMIP_WORKERS", "2")
        cfg = EngineConfig.from_env()
        assert cfg.mode == Mode.INTERVAL
        assert cfg.workers == 2

    def test_modes_up_to(self):
        assert modes_up_to(Mode.MINIMIP) == [Mode.INTERVAL, Mode.SYMBOLIC, Mode.MINIMIP]
        assert Mode.DEEPMIP.uses_mip and not Mode.SYMBOLIC.uses_mip


class TestPrecedence:
    def test_flags_over_env_over_yaml(self, yaml_config, monkeypatch):
        path = yaml_config({"mode": "symbolic", "alpha": "one", "workers": 3})
        monkeypatch.setenv("BPMIP_MODE", "minimip")
        cfg = EngineConfigFactory.create(path)
        assert cfg.mode == Mode.MINIMIP
        assert cfg.alpha.kind == AlphaKind.ONE
        assert cfg.workers == 3

        cfg = EngineConfigFactory.create(path, {"mode": "interval", "workers": None})
        assert cfg.mode == Mode.INTERVAL
        assert cfg.workers == 3

    def test_yaml_over_defaults(self, yaml_config):
        cfg = EngineConfigFactory.create(yaml_config({"concretization": "mip"}))
        assert cfg.concretization == Concretization.MIP
        assert cfg.mode == Mode.DEEPMIP


class TestFactory:
    def test_presets(self):
        assert EngineConfigFactory.get_recommended_config("smoke").mode == Mode.SYMBOLIC
        thorough = EngineConfigFactory.get_recommended_config("thorough")
        assert thorough.concretization == Concretization.MIP
        with pytest.raises(ConfigurationError):
            EngineConfigFactory.get_recommended_config("overnight")

    def test_create_from_config(self):
        cfg = EngineConfigFactory.create_from_config({"engine_preset": "smoke", "engine_config": {"alpha": "zero"}})
        assert cfg.mode == Mode.SYMBOLIC
        assert cfg.node_limit == 200
        assert cfg.alpha.kind == AlphaKind.ZERO

    def test_create_from_env(self, monkeypatch):
        monkeypatch.setenv("BPMIP_CONCRETIZATION", "mip")
        assert EngineConfigFactory.create_from_env().concretization == Concretization.MIP
