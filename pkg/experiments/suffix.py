# -*- coding: utf-8 -*-
"""
experiments/suffix.py
Suffix fixing: fine-tune a pool of checkpoints on the same last b batches of a donor
order and watch the spread of average odds shrink as b grows. Includes the donor
selection from a reference run, the random-batch variant and the one-epoch
common-random-order check.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

from dataclasses import dataclass
from typing import Any, Literal, Sequence

import numpy as np

from data.dataset import Splits
from data.orders import DataOrder, batches, epoch_order, reference_order
from evaluation.stats import spread
from experiments.common import (
    Checkpoint,
    ExperimentReport,
    finetune,
    sample_checkpoint_pool,
    seed_schedule,
    spread_row,
)
from models.common import TrainConfig
from pipeline import RunResult, evaluate_model, train_run
from util.errors import ConfigError, InsufficientSamplesError
from util.logger import get_logger
from util.prng import SAMPLE_STREAM, prng_from, shuffle

logger = get_logger("experiments.suffix")

SuffixVariant = Literal["suffix", "random_batches"]
REPORTED = ("avg_odds", "f1")


@dataclass(frozen=True)
class DonorOrder:
    label: str  # "best" or "worst"
    epoch: int
    val_avg_odds: float
    order: DataOrder


def select_donor_orders(run: RunResult, config: TrainConfig, n_train: int) -> list[DonorOrder]:
    """
    Orders of the epochs in [T1, T2] with the best (lowest) and worst (highest)
    validation average odds. NaN epochs are ignored.
    """
    t1, t2 = config.record_window
    epochs = run.val_trajectory.epochs()
    values = run.val_trajectory.values("avg_odds")
    keep = (epochs >= t1) & (epochs <= t2) & np.isfinite(values)
    if not keep.any():
        raise InsufficientSamplesError(f"no finite validation average odds in [{t1}, {t2}]")
    epochs, values = epochs[keep], values[keep]
    reference = reference_order(n_train, config.shuffle_seed)
    donors = []
    for label, pick in (("best", int(np.argmin(values))), ("worst", int(np.argmax(values)))):
        epoch = int(epochs[pick])
        donors.append(DonorOrder(label, epoch, float(values[pick]), epoch_order(reference, epoch)))
        logger.info(f"{label} donor: epoch {epoch} with validation AO {values[pick]:.3f}")
    return donors


def _pick_batches(batch_list: list[np.ndarray], b: int, variant: SuffixVariant, seed: int) -> list[np.ndarray]:
    if variant == "suffix":
        return batch_list[len(batch_list) - b:]
    picked, _ = shuffle(np.arange(len(batch_list)), prng_from(seed + b, SAMPLE_STREAM))
    return [batch_list[k] for k in sorted(picked[:b].tolist())]


def suffix_finetune(
    checkpoints: Sequence[Checkpoint],
    donor_order: DataOrder,
    b_values: Sequence[int],
    config: TrainConfig,
    splits: Splits,
    variant: SuffixVariant = "suffix",
    seed: int = 0,
) -> tuple[list[dict[str, Any]], list[dict[str, Any]]]:
    """
    For each b, fine-tune every checkpoint on the last b batches of `donor_order`
    (or b random batches of it) and evaluate on the test split. b = 0 evaluates the
    checkpoints as they are.

    Returns (per-checkpoint rows, per-b spread rows).
    """
    if not checkpoints:
        raise InsufficientSamplesError("suffix fine-tuning needs at least one checkpoint")
    batch_list = batches(donor_order, config.batch_size)
    too_long = [b for b in b_values if not 0 <= b <= len(batch_list)]
    if too_long:
        raise ConfigError(f"b values {too_long} outside [0, {len(batch_list)}] batches per epoch")
    points, spreads = [], []
    for b in b_values:
        chosen = _pick_batches(batch_list, b, variant, seed)
        records = [evaluate_model(c.model, splits.test, c.epoch) if b == 0
                   else finetune(c, splits, chosen, config) for c in checkpoints]
        points += [{"variant": variant, "b": b, "run_id": c.run_id, "epoch": c.epoch,
                    **{m: r.value(m) for m in REPORTED}} for c, r in zip(checkpoints, records)]
        for metric in REPORTED:
            spreads.append(spread_row(spread(r.value(metric) for r in records),
                                      variant=variant, b=b, metric=metric))
        logger.debug(f"{variant} b={b}: AO IQR {spreads[-len(REPORTED)]['iqr']:.3f}")
    return points, spreads


def immediate_impact(
    checkpoints: Sequence[Checkpoint],
    splits: Splits,
    config: TrainConfig,
    seed: int,
) -> list[dict[str, Any]]:
    """Spread of every metric before and after one epoch on a common fresh random order."""
    order = reference_order(splits.train.n, seed)
    batch_list = batches(order, config.batch_size)
    before = [evaluate_model(c.model, splits.test, c.epoch) for c in checkpoints]
    after = [finetune(c, splits, batch_list, config) for c in checkpoints]
    rows = []
    for stage, records in (("before", before), ("after", after)):
        for metric in REPORTED:
            rows.append(spread_row(spread(r.value(metric) for r in records), stage=stage, metric=metric))
    return rows


def suffix_experiment(
    splits: Splits,
    config: TrainConfig,
    n_runs: int,
    n_checkpoints: int,
    b_values: Sequence[int],
    variant: SuffixVariant = "suffix",
    master_seed: int = 0,
    jobs: int = 1,
) -> ExperimentReport:
    """
    Checkpoint pool from n_runs both-random runs, donors from one more reference run,
    then suffix fine-tuning for both donors and the common-random-order check.
    """
    if config.epochs == 0:
        raise ConfigError("suffix fine-tuning needs epochs >= 1")
    pool, seeds = sample_checkpoint_pool(splits, config, n_runs, n_checkpoints, master_seed, jobs)
    donor_config = config.with_seeds(*seed_schedule(master_seed, n_runs))
    donor_run = train_run(splits, donor_config, "donor")
    seeds.append({"run_id": "donor", "weight_seed": donor_config.weight_seed,
                  "shuffle_seed": donor_config.shuffle_seed})
    points, spreads = [], []
    for donor in select_donor_orders(donor_run, donor_config, splits.train.n):
        p, s = suffix_finetune(pool, donor.order, b_values, config, splits, variant, master_seed)
        extra = {"donor": donor.label, "donor_epoch": donor.epoch}
        points += [{**extra, **row} for row in p]
        spreads += [{**extra, **row} for row in s]
    impact = immediate_impact(pool, splits, config, master_seed)
    summary = {
        row["donor"]: {"b": row["b"], "median_avg_odds": row["median"], "iqr_avg_odds": row["iqr"]}
        for row in spreads if row["metric"] == "avg_odds" and row["b"] == max(b_values)
    }
    summary["pool"] = [{"run_id": c.run_id, "epoch": c.epoch} for c in pool]
    return ExperimentReport(
        name="suffix",
        config={"train": config, "n_runs": n_runs, "n_checkpoints": n_checkpoints,
                "b_values": list(b_values), "variant": variant, "master_seed": master_seed},
        seeds=seeds,
        trajectories=[donor_run.trajectory],
        tables={"suffix_points": points, "suffix_spread": spreads, "immediate_impact": impact},
        summary=summary,
    )
