# -*- coding: utf-8 -*-
"""
models/common.py
Shared schemas for fairorder: the training hyperparameters with their two decoupled seeds,
the synthetic dataset recipe, the ratio recipe for custom data orders, and the canonical
subgroup ordering every module reports in.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

MAX_SEED = 0xFFFFFFFFFFFFFFFF

# (a, y) cells in canonical order: F+, M+, M-, F-. Largest-remainder ties break in this order.
SUBGROUPS: tuple[tuple[int, int], ...] = ((0, 1), (1, 1), (1, 0), (0, 0))
SUBGROUP_NAMES: tuple[str, ...] = tuple(f"a{a}y{y}" for a, y in SUBGROUPS)
# column order of trajectory files
REPORT_SUBGROUPS: tuple[tuple[int, int], ...] = ((0, 1), (0, 0), (1, 1), (1, 0))

LossKind = Literal["plain_ce", "weighted_ce", "ce_plus_eo"]
CheckpointPolicy = Literal["none", "window", "all"]


class TrainConfig(BaseModel):
    """Hyperparameters of one training run plus its weight-init and reshuffle seeds."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    hidden_sizes: tuple[int, ...] = Field((64,), description="widths of the ReLU hidden layers")
    learning_rate: float = Field(1e-3, ge=0.0)
    batch_size: int = Field(128, ge=1)
    epochs: int = Field(300, ge=0, description="T, number of passes over the training split")
    dropout_rate: float = Field(0.0, ge=0.0, lt=1.0)
    weight_seed: int = Field(0, ge=0, le=MAX_SEED)
    shuffle_seed: int = Field(0, ge=0, le=MAX_SEED, description="r_s, seed of the reference order")
    loss: LossKind = "plain_ce"
    eo_lambda: float = Field(1.0, ge=0.0, description="weight of the equalized-odds penalty")
    record_window: tuple[int, int] = Field((100, 300), description="(T1, T2), inclusive")
    checkpoints: CheckpointPolicy = "none"

    @field_validator("hidden_sizes")
    @classmethod
    def _positive_widths(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if any(width < 1 for width in value):
            raise ValueError(f"hidden layer widths must be positive, got {list(value)}")
        return value

    @model_validator(mode="after")
    def _window_inside_run(self) -> "TrainConfig":
        t1, t2 = self.record_window
        if self.epochs > 0 and not 1 <= t1 <= t2 <= self.epochs:
            raise ValueError(
                f"record_window {self.record_window} must satisfy 1 <= T1 <= T2 <= epochs={self.epochs}"
            )
        return self

    def with_seeds(self, weight_seed: int, shuffle_seed: int) -> "TrainConfig":
        return self.model_copy(update={"weight_seed": weight_seed, "shuffle_seed": shuffle_seed})


class SynthSpec(BaseModel):
    """Recipe for a synthetic dataset with an under-represented positive subgroup."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    n: int = Field(20_000, ge=4, description="rows; at least one per subgroup")
    dims: int = Field(10, ge=2)
    # shares of (F,+), (M,+), (M,-), (F,-)
    proportions: tuple[float, float, float, float] = (0.1651, 0.2455, 0.2816, 0.3078)
    delta: float = Field(2.0, description="label separation along the first axis")
    epsilon: float = Field(0.5, description="group shift along the second axis")
    sigma: float = Field(1.0, ge=0.0)
    seed: int = Field(0, ge=0, le=MAX_SEED)

    @field_validator("proportions")
    @classmethod
    def _proportions_simplex(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if any(p < 0 for p in value):
            raise ValueError(f"subgroup proportions must be nonnegative, got {list(value)}")
        if abs(sum(value) - 1.0) > 1e-9:
            raise ValueError(f"subgroup proportions must sum to 1, got {sum(value)!r}")
        return value


class RatioSpec(BaseModel):
    """Positive:negative ratio forced on one sensitive group in the order suffix."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    varied_group: Literal[0, 1] = 0
    pos_to_neg: float = Field(1.0, gt=0.0)


def parse_ratio(text: str | float | int) -> float:
    """'1:3' -> 0.333..., '3' -> 3.0"""
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        parts = str(text).split(":")
        if len(parts) == 1:
            value = float(parts[0])
        elif len(parts) == 2:
            pos, neg = float(parts[0]), float(parts[1])
            if neg <= 0:
                raise ValueError(f"ratio '{text}' has a non-positive negative part")
            value = pos / neg
        else:
            raise ValueError(f"cannot parse ratio '{text}'")
    if not value > 0:
        raise ValueError(f"ratio must be positive, got '{text}'")
    return value
