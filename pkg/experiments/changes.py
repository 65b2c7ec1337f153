# -*- coding: utf-8 -*-
"""
experiments/changes.py
Prediction-change tracking: how many rows of each subgroup flip their prediction between
consecutive checkpoints over the record window.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

import math
from typing import Any, Mapping

import numpy as np

from data.dataset import Dataset, Splits
from experiments.common import ExperimentReport, seed_rows, seeded_configs
from models.common import SUBGROUP_NAMES, SUBGROUPS, TrainConfig
from models.network import Model, predict
from pipeline import train_run
from util.errors import ConfigError, InsufficientSamplesError
from util.logger import get_logger

logger = get_logger("experiments.changes")


def _percent(hits: np.ndarray, codes: np.ndarray, sizes: np.ndarray) -> list[float]:
    counts = np.bincount(codes[hits], minlength=len(SUBGROUPS))
    return [100.0 * c / s if s else math.nan for c, s in zip(counts, sizes)]


def prediction_change_tracking(checkpoints: Mapping[int, Model], eval_set: Dataset) -> list[dict[str, Any]]:
    """
    For each epoch k after the first checkpoint, the percentage of every subgroup whose
    prediction changed at least once up to k (`cumulative`) and at k itself (`at_epoch`).

    Checkpoints must cover consecutive epochs.
    """
    if len(checkpoints) < 2:
        raise InsufficientSamplesError(f"change tracking needs >= 2 checkpoints, got {len(checkpoints)}")
    epochs = sorted(checkpoints)
    gaps = [b for a, b in zip(epochs, epochs[1:]) if b != a + 1]
    if gaps:
        raise ConfigError(f"checkpoints must cover consecutive epochs; missing before {gaps}")
    codes = eval_set.subgroup_codes()
    sizes = eval_set.subgroup_counts()
    ever = np.zeros(eval_set.n, dtype=bool)
    previous = predict(checkpoints[epochs[0]], eval_set.features)
    rows = []
    for epoch in epochs[1:]:
        current = predict(checkpoints[epoch], eval_set.features)
        flipped = current != previous
        ever |= flipped
        cumulative = _percent(ever, codes, sizes)
        at_epoch = _percent(flipped, codes, sizes)
        for k, name in enumerate(SUBGROUP_NAMES):
            rows.append({"epoch": epoch, "subgroup": name, "cumulative": cumulative[k],
                         "at_epoch": at_epoch[k]})
        previous = current
    return rows


def subgroup_shares(dataset: Dataset) -> list[dict[str, Any]]:
    counts = dataset.subgroup_counts()
    return [{"subgroup": name, "count": int(c), "share": 100.0 * c / dataset.n}
            for name, c in zip(SUBGROUP_NAMES, counts)]


def change_tracking_experiment(
    splits: Splits,
    config: TrainConfig,
    master_seed: int = 0,
) -> ExperimentReport:
    """One both-random run keeping every checkpoint in [T1, T2], tracked on the test split."""
    if config.epochs == 0:
        raise ConfigError("change tracking needs epochs >= 1")
    configs = seeded_configs(config.model_copy(update={"checkpoints": "window"}), 1, master_seed)
    run_id, run_config = configs[0]
    result = train_run(splits, run_config, run_id)
    rows = prediction_change_tracking(result.checkpoints, splits.test)
    last = {row["subgroup"]: row["cumulative"] for row in rows if row["epoch"] == max(result.checkpoints)}
    logger.info("Cumulative changed share at window end: "
                + ", ".join(f"{name}={value:.2f}%" for name, value in last.items()))
    return ExperimentReport(
        name="changes",
        config={"train": config, "master_seed": master_seed},
        seeds=seed_rows(configs),
        trajectories=[result.trajectory],
        tables={"changes": [{"run_id": run_id, **row} for row in rows],
                "shares": subgroup_shares(splits.test)},
        summary={"cumulative_at_window_end": last, "window": list(config.record_window)},
    )
