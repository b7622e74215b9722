# pylint: disable=line-too-long, function-name-too-long
"""
Engine configuration.

Precedence when assembling a config is flags > environment > YAML file > defaults.
Environment variables (a ``.env`` file is honoured through python-dotenv):

    BPMIP_MODE, BPMIP_ALPHA, BPMIP_MIP_BUDGET_MS, BPMIP_NEURON_BUDGET_MS,
    BPMIP_CONCRETIZATION, BPMIP_WORKERS
"""

import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from typing import Any, Dict, Literal, Optional

import yaml
from dotenv import find_dotenv, load_dotenv

from ..errors import ConfigurationError
from .relaxation import AlphaPolicy

logger = logging.getLogger(__name__)


class Mode(Enum):
    INTERVAL = "interval"
    SYMBOLIC = "symbolic"
    MINIMIP = "minimip"
    DEEPMIP = "deepmip"

    @property
    def rank(self) -> int:
        return _MODE_ORDER.index(self)

    @property
    def uses_mip(self) -> bool:
        return self in (Mode.MINIMIP, Mode.DEEPMIP)

    @classmethod
    def parse(cls, value: str) -> "Mode":
        try:
            return cls(value.strip().lower())
        except ValueError as e:
            raise ConfigurationError(f"unknown mode {value!r}; expected one of {[m.value for m in cls]}") from e


_MODE_ORDER = [Mode.INTERVAL, Mode.SYMBOLIC, Mode.MINIMIP, Mode.DEEPMIP]


def modes_up_to(mode: Mode):
    return _MODE_ORDER[:mode.rank + 1]


class Concretization(Enum):
    BOX = "box"
    MIP = "mip"


@dataclass(frozen=True)
class EngineConfig:
    mode: Mode = Mode.DEEPMIP
    alpha: AlphaPolicy = field(default_factory=AlphaPolicy.crown)
    mip_budget_ms: Optional[float] = 500.0
    neuron_budget_ms: Optional[float] = None
    concretization: Concretization = Concretization.BOX
    tolerance: float = 1e-9
    mip_gap: float = 1e-8
    pivot_tolerance: float = 1e-9
    node_limit: int = 100000
    workers: int = 1
    nest_modes: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.mip_budget_ms is not None and self.mip_budget_ms <= 0:
            raise ConfigurationError(f"mip_budget_ms must be positive, got {self.mip_budget_ms}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        if self.node_limit < 1:
            raise ConfigurationError(f"node_limit must be >= 1, got {self.node_limit}")

    def with_mode(self, mode: Mode) -> "EngineConfig":
        return replace(self, mode=mode)

    def merged(self, overrides: Dict[str, Any]) -> "EngineConfig":
        """Apply the non-None entries of ``overrides`` (typically parsed CLI flags)."""
        return EngineConfig.from_dict({k: v for k, v in overrides.items() if v is not None}, self)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["mode"] = self.mode.value
        data["alpha"] = self.alpha.describe()
        data["concretization"] = self.concretization.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base: Optional["EngineConfig"] = None) -> "EngineConfig":
        """Overlay the keys present in ``data`` on ``base`` (defaults when omitted)."""
        base = base or cls()
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown engine config keys: {sorted(unknown)}")
        updates: Dict[str, Any] = {}
        for key, value in data.items():
            if value is None and key not in ("mip_budget_ms", "neuron_budget_ms"):
                continue
            try:
                if key == "mode":
                    value = value if isinstance(value, Mode) else Mode.parse(str(value))
                elif key == "alpha":
                    value = value if isinstance(value, AlphaPolicy) else AlphaPolicy.parse(str(value))
                elif key == "concretization":
                    value = value if isinstance(value, Concretization) else Concretization(str(value).lower())
                elif key in ("mip_budget_ms", "neuron_budget_ms"):
                    value = None if value is None else float(value)
                elif key in ("tolerance", "mip_gap", "pivot_tolerance"):
                    value = float(value)
                elif key in ("node_limit", "workers", "seed"):
                    value = int(value)
                elif key == "nest_modes":
                    value = value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes")
            except (TypeError, ValueError) as e:
                raise ConfigurationError(f"bad value for {key}: {value!r} ({e})") from e
            updates[key] = value
        return replace(base, **updates)

    @classmethod
    def from_yaml(cls, path: str, base: Optional["EngineConfig"] = None) -> "EngineConfig":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigurationError(f"cannot read config file {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"config file {path} must hold a mapping")
        # the engine keys may sit under an ``engine:`` section
        data = data.get("engine", data)
        return cls.from_dict(data, base)

    @classmethod
    def from_env(cls, base: Optional["EngineConfig"] = None) -> "EngineConfig":
        load_dotenv(find_dotenv(usecwd=True))
        env_keys = {
            "mode": "BPMIP_MODE",
            "alpha": "BPMIP_ALPHA",
            "mip_budget_ms": "BPMIP_MIP_BUDGET_MS",
            "neuron_budget_ms": "BPMIP_NEURON_BUDGET_MS",
            "concretization": "BPMIP_CONCRETIZATION",
            "workers": "BPMIP_WORKERS",
        }
        data = {key: os.getenv(var) for key, var in env_keys.items() if os.getenv(var)}
        if data:
            logger.info("engine config from environment: %s", data)
        return cls.from_dict(data, base)


class EngineConfigFactory:
    """Builds EngineConfig objects from the different configuration sources."""

    @staticmethod
    def create_from_config(config: Dict[str, Any]) -> EngineConfig:
        """
        Example:
            config = {
                "engine_preset": "desk",
                "engine_config": {"mode": "minimip", "alpha": "zero"}
            }
        """
        preset = config.get("engine_preset")
        base = EngineConfigFactory.get_recommended_config(preset) if preset else EngineConfig()
        return EngineConfig.from_dict(config.get("engine_config", {}), base)

    @staticmethod
    def create_from_env() -> EngineConfig:
        return EngineConfig.from_env()

    @staticmethod
    def create(config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> EngineConfig:
        """Defaults, then the YAML file, then the environment, then explicit overrides."""
        config = EngineConfig()
        if config_path:
            config = EngineConfig.from_yaml(config_path, config)
        config = EngineConfig.from_env(config)
        if overrides:
            config = config.merged(overrides)
        return config

    @staticmethod
    def get_recommended_config(use_case: Literal["smoke", "desk", "thorough"] = "desk") -> EngineConfig:
        recommendations = {
            "smoke": EngineConfig(mode=Mode.SYMBOLIC, mip_budget_ms=50.0, node_limit=200),
            "desk": EngineConfig(),
            "thorough": EngineConfig(mode=Mode.DEEPMIP, mip_budget_ms=5000.0, concretization=Concretization.MIP),
        }
        if use_case not in recommendations:
            raise ConfigurationError(f"unknown preset {use_case!r}")
        return recommendations[use_case]
