"""Experiment configuration: YAML documents with dotted keys mapped onto typed dataclasses."""

import dataclasses
import types
import typing
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..agent import AgentConfig
from ..baseline import BaselineConfig
from ..common import write_text
from ..coordination import CoordConfig, ModifierConfig
from ..core import SliceKind, SliceSpec
from ..env import EnvConfig
from ..errors import ConfigError
from ..safety import EstimatorConfig, SafetyConfig

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "configs" / "default.yaml"


@dataclass
class SliceSetConfig:
    tags: tuple[str, ...] = ("MAR", "HVS", "RDC")
    perf_targets: tuple[float, ...] = (500.0, 30.0, 0.99999)
    max_traffic: tuple[float, ...] = (5.0, 2.0, 100.0)
    sla_thresholds: tuple[float, ...] = (0.05, 0.05, 0.05)
    trace_path: str = ""

    def __post_init__(self):
        n = len(self.tags)
        for name in ("perf_targets", "max_traffic", "sla_thresholds"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} needs one value per slice ({n}), got {len(getattr(self, name))}")

    def specs(self) -> list[SliceSpec]:
        return [
            SliceSpec(i, SliceKind(tag, target), sla, max_traffic)
            for i, (tag, target, max_traffic, sla) in enumerate(
                zip(self.tags, self.perf_targets, self.max_traffic, self.sla_thresholds)
            )
        ]


@dataclass
class TrainingConfig:
    seed: int = 0
    out_dir: str = "runs/default"
    train_days: int = 60
    baseline_episodes: int = 20
    transitions_per_epoch: int = 1000
    epochs: int = 100
    eval_episodes: int = 20
    estimator_refit_epochs: int = 20


@dataclass
class ExperimentConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    slices: SliceSetConfig = field(default_factory=SliceSetConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    safety: SafetyConfig = field(default_factory=SafetyConfig)
    coord: CoordConfig = field(default_factory=CoordConfig)
    modifier: ModifierConfig = field(default_factory=ModifierConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)

    @property
    def episodes_per_epoch(self) -> int:
        return -(-self.training.transitions_per_epoch // self.env.slots_per_episode)

    def to_flat(self) -> dict:
        return to_flat(self)


def flatten(mapping: dict, prefix: str = "") -> dict:
    """Nested mappings become dotted keys; already-dotted keys pass through."""
    flat = {}
    for key, value in mapping.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def _coerce(key: str, value, tp):
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        options = [t for t in typing.get_args(tp) if t is not type(None)]
        if value is None:
            return None
        return _coerce(key, value, options[0])
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(key, f"expected a list, got {value!r}")
        item_tp = typing.get_args(tp)[0]
        return tuple(_coerce(key, v, item_tp) for v in value)
    if tp is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(key, f"expected true/false, got {value!r}")
    if tp in (int, float):
        if isinstance(value, bool):
            raise ConfigError(key, f"expected a number, got {value!r}")
        try:
            number = tp(value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"expected {tp.__name__}, got {value!r}") from None
        if tp is int and number != value:
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return number
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    raise ConfigError(key, f"unsupported field type {tp!r}")


def _build(cls, flat: dict, prefix: str):
    hints = typing.get_type_hints(cls)
    kwargs = {}
    names = {f.name for f in dataclasses.fields(cls)}
    for f in dataclasses.fields(cls):
        tp = hints[f.name]
        dotted = f"{prefix}{f.name}"
        if dataclasses.is_dataclass(tp):
            if dotted in flat:
                raise ConfigError(dotted, "expected a section, got a scalar")
            sub = {k: v for k, v in flat.items() if k.startswith(f"{dotted}.")}
            if sub:
                kwargs[f.name] = _build(tp, sub, f"{dotted}.")
        elif dotted in flat:
            kwargs[f.name] = _coerce(dotted, flat[dotted], tp)
    for key in flat:
        head = key[len(prefix):].split(".", 1)[0]
        if head not in names:
            raise ConfigError(key, "unknown configuration key")
    try:
        return cls(**kwargs)
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(prefix.rstrip(".") or "config", str(e)) from e


def config_from_mapping(mapping: dict | None) -> ExperimentConfig:
    return _build(ExperimentConfig, flatten(mapping or {}), "")


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a YAML config (the packaged default when ``path`` is None) and apply dotted overrides."""
    path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    with open(path) as f:
        mapping = yaml.safe_load(f) or {}
    if not isinstance(mapping, dict):
        raise ConfigError(str(path), "a config document must be a mapping")
    flat = flatten(mapping)
    flat.update(overrides or {})
    return _build(ExperimentConfig, flat, "")


def to_flat(obj, prefix: str = "") -> dict:
    flat = {}
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        dotted = f"{prefix}{f.name}"
        if dataclasses.is_dataclass(value):
            flat.update(to_flat(value, f"{dotted}."))
        elif isinstance(value, tuple):
            flat[dotted] = list(value)
        else:
            flat[dotted] = value
    return flat


def dump_config(path, config: ExperimentConfig) -> None:
    write_text(path, yaml.safe_dump(config.to_flat(), sort_keys=True, default_flow_style=None))
