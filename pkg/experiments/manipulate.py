# -*- coding: utf-8 -*-
"""
experiments/manipulate.py
Group-accuracy manipulation: fine-tune checkpoints for one epoch on ratio-controlled
orders and record subgroup and overall accuracy against the forced pos:neg ratio.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

from typing import Any, Sequence

from data.dataset import Splits, minority_positive_group
from data.orders import batches, build_ratio_order
from evaluation.stats import spread
from experiments.common import Checkpoint, ExperimentReport, finetune, sample_checkpoint_pool, spread_row
from models.common import SUBGROUP_NAMES, RatioSpec, TrainConfig
from pipeline import evaluate_model
from util.errors import ConfigError, InsufficientSamplesError
from util.logger import get_logger

logger = get_logger("experiments.manipulate")

ACCURACY_METRICS = ("acc", *(f"acc_{name}" for name in SUBGROUP_NAMES))


def manipulate_sweep(
    checkpoints: Sequence[Checkpoint],
    ratio_values: Sequence[float],
    varied_group: int,
    config: TrainConfig,
    splits: Splits,
    seed: int = 0,
) -> tuple[list[dict[str, Any]], list[dict[str, Any]]]:
    """
    Baseline accuracies of the checkpoints, then one epoch on build_ratio_order(r) per
    ratio. Returns (per-checkpoint rows, per-ratio spread rows); the baseline rows carry
    ratio None.
    """
    if not checkpoints:
        raise InsufficientSamplesError("manipulation needs at least one checkpoint")
    bad = [r for r in ratio_values if not r > 0]
    if bad:
        raise ConfigError(f"ratios must be positive, got {bad}")
    sweep: list[tuple[float | None, list]] = [
        (None, [evaluate_model(c.model, splits.test, c.epoch) for c in checkpoints])]
    for r in ratio_values:
        order = build_ratio_order(splits.train, RatioSpec(varied_group=varied_group, pos_to_neg=r),
                                  config.batch_size, seed)
        batch_list = batches(order, config.batch_size)
        sweep.append((r, [finetune(c, splits, batch_list, config) for c in checkpoints]))
        logger.info(f"ratio {r:.4f}: fine-tuned {len(checkpoints)} checkpoints "
                    f"(suffix starts at row {order.suffix_start})")
    points, spreads = [], []
    for r, records in sweep:
        points += [{"ratio": r, "run_id": c.run_id, "epoch": c.epoch,
                    **{m: rec.value(m) for m in ACCURACY_METRICS}}
                   for c, rec in zip(checkpoints, records)]
        spreads += [spread_row(spread(rec.value(m) for rec in records), ratio=r, metric=m)
                    for m in ACCURACY_METRICS]
    return points, spreads


def manipulate_experiment(
    splits: Splits,
    config: TrainConfig,
    n_runs: int,
    n_checkpoints: int,
    ratio_values: Sequence[float],
    varied_group: int | None = None,
    master_seed: int = 0,
    jobs: int = 1,
) -> ExperimentReport:
    """Checkpoint pool, then the ratio sweep on the minority-positive group unless given."""
    if config.epochs == 0:
        raise ConfigError("manipulation needs epochs >= 1")
    group = minority_positive_group(splits.train) if varied_group is None else varied_group
    pool, seeds = sample_checkpoint_pool(splits, config, n_runs, n_checkpoints, master_seed, jobs)
    points, spreads = manipulate_sweep(pool, ratio_values, group, config, splits, master_seed)
    medians = {("baseline" if row["ratio"] is None else f"{row['ratio']:g}"): row["median"]
               for row in spreads if row["metric"] == f"acc_a{group}y1"}
    return ExperimentReport(
        name="manipulate",
        config={"train": config, "n_runs": n_runs, "n_checkpoints": n_checkpoints,
                "ratio_values": list(ratio_values), "varied_group": group, "master_seed": master_seed},
        seeds=seeds,
        tables={"manipulate_points": points, "manipulate_spread": spreads},
        summary={"varied_group": group, "median_positive_accuracy": medians,
                 "pool": [{"run_id": c.run_id, "epoch": c.epoch} for c in pool]},
    )
