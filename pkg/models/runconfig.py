# -*- coding: utf-8 -*-
"""
models/runconfig.py
The run configuration file: dataset source, split, training hyperparameters and the
parameters of every experiment, with the full and desk presets and the
defaults < preset < file < flags merge.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

import copy
import json
from pathlib import Path
from typing import Any, Literal, Mapping

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ModelWrapValidatorHandler,
    ValidationError,
    field_validator,
    model_validator,
)

from data.dataset import largest_remainder
from models.common import MAX_SEED, SynthSpec, TrainConfig, parse_ratio
from util.errors import ConfigError

DEFAULT_VARIANTS: dict[str, dict[str, Any]] = {
    "default": {},
    "batch_16": {"batch_size": 16},
    "lr_0.01": {"learning_rate": 0.01},
    "arch_256_64": {"hidden_sizes": [256, 64]},
    "dropout_0.1": {"dropout_rate": 0.1},
}


class DatasetConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    source: Literal["synthetic", "csv"] = "synthetic"
    csv_path: str | None = None
    label_column: str = "y"
    sensitive_column: str = "a"
    sensitive_as_feature: bool = Field(False, description="feed the sensitive attribute to the network as an input")
    synthetic: SynthSpec = SynthSpec()


class SplitConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ratios: tuple[float, float, float] = (0.7, 0.1, 0.2)
    seed: int = Field(0, ge=0, le=MAX_SEED)

    @field_validator("ratios")
    @classmethod
    def _ratios_simplex(cls, value: tuple[float, float, float]) -> tuple[float, float, float]:
        if any(r <= 0 for r in value) or abs(sum(value) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must be positive and sum to 1, got {list(value)}")
        return value


class ExperimentParams(BaseModel):
    """Parameters of the individual experiments; each subcommand reads its own."""
    model_config = ConfigDict(extra="forbid")

    n_runs: int = Field(50, ge=2, description="runs per decoupling or proxy sample")
    mode: Literal["both_random", "fixed_reshuffle", "fixed_weight_init", "fixed_both"] = "both_random"
    variants: dict[str, dict[str, Any]] = Field(default_factory=lambda: copy.deepcopy(DEFAULT_VARIANTS))
    pool_runs: int = Field(50, ge=1, description="runs feeding the checkpoint pool")
    n_checkpoints: int = Field(1000, ge=1)
    b_values: list[int] = Field(default_factory=lambda: [0, 1, 2, 4, 8, 16, 32])
    suffix_variant: Literal["suffix", "random_batches"] = "suffix"
    ratio_values: list[str] = Field(default_factory=lambda: ["1:8", "1:3", "1:1", "3:1", "8:1"])
    varied_group: Literal[0, 1] | None = None
    passes: int = Field(1000, ge=2)
    mc_dropout_rate: float = Field(0.1, gt=0.0, lt=1.0)
    stopping_epochs: list[int] | None = None
    bins: int = Field(10, ge=1)
    t_max: int = Field(100, ge=1)
    s_max: int = Field(50, ge=1)
    repeats: int = Field(50, ge=1)
    n_seeds: int = Field(10, ge=3)
    setups: list[Literal["baseline", "reweighing", "eo_loss"]] = Field(
        default_factory=lambda: ["baseline", "reweighing", "eo_loss"])
    post_orders: list[Literal["none", "reshuffle", "equal_order", "adv_order"]] = Field(
        default_factory=lambda: ["none", "reshuffle", "equal_order", "adv_order"])

    @field_validator("b_values")
    @classmethod
    def _b_nonnegative(cls, value: list[int]) -> list[int]:
        if not value or any(b < 0 for b in value):
            raise ValueError(f"b_values must be a nonempty list of nonnegative ints, got {value}")
        return value

    def ratios(self) -> list[float]:
        return [parse_ratio(r) for r in self.ratio_values]


class RunConfigFile(BaseModel):
    """Everything a subcommand needs; echoed verbatim into every report."""
    model_config = ConfigDict(extra="forbid")

    dataset: DatasetConfig = DatasetConfig()
    split: SplitConfig = SplitConfig()
    train: TrainConfig = TrainConfig()
    experiment: ExperimentParams = ExperimentParams()
    master_seed: int = Field(0, ge=0, le=MAX_SEED)
    output_dir: str = "results"
    jobs: int = Field(1, ge=1)

    def _train_rows(self) -> int | None:
        if self.dataset.source != "synthetic":
            return None
        return int(largest_remainder(self.dataset.synthetic.n, self.split.ratios)[0])

    @model_validator(mode="wrap")
    @classmethod
    def _cross_field(cls, data: Any, handler: ModelWrapValidatorHandler["RunConfigFile"]) -> "RunConfigFile":
        """Field errors and cross-field problems are raised together in one ValidationError."""
        config, field_errors = None, []
        try:
            config = handler(data)
        except ValidationError as e:
            field_errors = [_line_error(err) for err in e.errors()]
        raw = config.model_dump() if config is not None else data
        problems = cross_field_problems(raw if isinstance(raw, Mapping) else {}, base_valid=config is not None)
        line_errors = field_errors + [{"type": "value_error", "loc": (), "input": data, "ctx": {"error": p}}
                                      for p in problems]
        if line_errors:
            raise ValidationError.from_exception_data(cls.__name__, line_errors)
        return config

    def check_for(self, command: str) -> None:
        """Preconditions of the experiment behind `command`, all reported in one ConfigError."""
        problems = []
        train, exp = self.train, self.experiment
        t1, t2 = train.record_window
        needs_epochs = {"changes", "suffix", "manipulate", "proxy", "blackswan", "mitigate"}
        if command in needs_epochs and train.epochs == 0:
            problems.append(f"'{command}' needs train.epochs >= 1")
        if command in ("suffix", "manipulate"):
            available = exp.pool_runs * (t2 - t1 + 1)
            if train.epochs > 0 and exp.n_checkpoints > available:
                problems.append(f"experiment.n_checkpoints {exp.n_checkpoints} exceeds the {available} "
                                f"checkpoints of {exp.pool_runs} runs over [{t1}, {t2}]")
        if command == "suffix":
            n_train = self._train_rows()
            if n_train is not None:
                per_epoch = -(-n_train // train.batch_size)
                too_long = [b for b in exp.b_values if b > per_epoch]
                if too_long:
                    problems.append(f"experiment.b_values {too_long} exceed {per_epoch} batches per epoch")
        if command in ("manipulate", "mitigate") and train.batch_size < 4:
            problems.append(f"ratio-controlled orders need train.batch_size >= 4, got {train.batch_size}")
        if command == "blackswan" and exp.t_max > train.epochs:
            problems.append(f"experiment.t_max {exp.t_max} exceeds train.epochs {train.epochs}")
        if command == "proxy" and exp.stopping_epochs is not None:
            bad = [e for e in exp.stopping_epochs if not 1 <= e <= train.epochs]
            if bad:
                problems.append(f"experiment.stopping_epochs {bad} outside [1, {train.epochs}]")
        if problems:
            raise ConfigError(problems)


PRESETS: dict[str, dict[str, Any]] = {
    "full": {"dataset": {"sensitive_as_feature": True}},
    "desk": {
        "dataset": {"sensitive_as_feature": True},
        "train": {"epochs": 150, "record_window": [80, 150], "learning_rate": 0.05},
        "experiment": {"n_runs": 10, "pool_runs": 8, "n_checkpoints": 40, "t_max": 10,
                       "s_max": 10, "repeats": 5},
    },
}


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    """Nested dicts merge key by key; anything else in `override` replaces."""
    out = copy.deepcopy(dict(base))
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _setting(raw: Mapping[str, Any], path: tuple[str, ...], default: Any) -> Any:
    node: Any = raw
    for key in path:
        if not isinstance(node, Mapping) or key not in node:
            return default
        node = node[key]
    return node


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _line_error(err: Mapping[str, Any]) -> dict[str, Any]:
    line = {"type": err["type"], "loc": err["loc"], "input": err["input"]}
    if "ctx" in err:
        line["ctx"] = err["ctx"]
    return line


def cross_field_problems(raw: Mapping[str, Any], base_valid: bool = True) -> list[str]:
    """
    Constraints that span sections, read from a possibly invalid config mapping.

    Missing settings take their defaults; settings of the wrong type are left to the field
    checks. With `base_valid` False the train section has field errors of its own, so a
    variant is only blamed for the keys it overrides.
    """
    problems = []
    source = _setting(raw, ("dataset", "source"), "synthetic")
    if source == "csv" and not _setting(raw, ("dataset", "csv_path"), None):
        problems.append("dataset.csv_path is required when dataset.source is 'csv'")
    n = _setting(raw, ("dataset", "synthetic", "n"), SynthSpec.model_fields["n"].default)
    ratios = _setting(raw, ("split", "ratios"), SplitConfig.model_fields["ratios"].default)
    batch_size = _setting(raw, ("train", "batch_size"), TrainConfig.model_fields["batch_size"].default)
    if source == "synthetic" and _is_number(n) and _is_number(batch_size):
        try:
            n_train = int(largest_remainder(int(n), ratios)[0])
        except (TypeError, ValueError):
            n_train = None
        if n_train is not None and batch_size > n_train:
            problems.append(f"train.batch_size {batch_size} exceeds the {n_train} training rows")
    ratio_values = _setting(raw, ("experiment", "ratio_values"), [])
    for text in ratio_values if isinstance(ratio_values, list) else []:
        if not isinstance(text, str):
            continue
        try:
            parse_ratio(text)
        except ValueError as e:
            problems.append(f"experiment.ratio_values: {e}")
    base = _setting(raw, ("train",), {})
    variants = _setting(raw, ("experiment", "variants"), {})
    if isinstance(base, Mapping) and isinstance(variants, Mapping):
        for name, overrides in variants.items():
            if not isinstance(overrides, Mapping):
                continue
            try:
                TrainConfig.model_validate({**base, **overrides})
            except ValidationError as e:
                problems += [f"experiment.variants.{name}.{'.'.join(map(str, err['loc']))}: {err['msg']}"
                             for err in e.errors()
                             if (err["loc"] and err["loc"][0] in overrides) or (base_valid and not err["loc"])]
    return problems


def load_run_config(
    path: str | Path | None = None,
    preset: str | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> RunConfigFile:
    """
    defaults < preset < config file < overrides, validated once at the end so that every
    violation is reported together.
    """
    merged: dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset '{preset}', choose from {sorted(PRESETS)}")
        merged = deep_merge(merged, PRESETS[preset])
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                file_config = json.load(f)
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(file_config, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        merged = deep_merge(merged, file_config)
    if overrides:
        merged = deep_merge(merged, overrides)
    return RunConfigFile.model_validate(merged)
