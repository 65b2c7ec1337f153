# -*- coding: utf-8 -*-
"""
experiments/mitigate.py
Data-order manipulation next to standard bias mitigation: train with plain, reweighed or
equalized-odds-penalized losses, then optionally apply one more epoch on EqualOrder or
AdvOrder, and compare F1 and average odds across seeds. The reshuffle cell gives each run
the same extra epoch on its own next stock order, the control for the order cells.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

from typing import Any, Literal, Sequence

from data.dataset import Splits
from data.orders import adv_order, batches, epoch_order, equal_order, reference_order
from evaluation.metrics import MetricRecord
from evaluation.stats import spread
from experiments.common import Checkpoint, ExperimentReport, finetune, run_many, seed_rows, seeded_configs, spread_row
from models.common import LossKind, TrainConfig
from util.errors import ConfigError
from util.logger import get_logger

logger = get_logger("experiments.mitigate")

Setup = Literal["baseline", "reweighing", "eo_loss"]
PostOrder = Literal["none", "reshuffle", "equal_order", "adv_order"]
SETUPS: tuple[str, ...] = ("baseline", "reweighing", "eo_loss")
POST_ORDERS: tuple[str, ...] = ("none", "reshuffle", "equal_order", "adv_order")
SETUP_LOSS: dict[str, LossKind] = {"baseline": "plain_ce", "reweighing": "weighted_ce", "eo_loss": "ce_plus_eo"}
REPORTED = ("f1", "avg_odds")


def mitigation_compare(
    splits: Splits,
    config: TrainConfig,
    n_seeds: int,
    setups: Sequence[Setup] = SETUPS,
    post_orders: Sequence[PostOrder] = POST_ORDERS,
    master_seed: int = 0,
    jobs: int = 1,
) -> ExperimentReport:
    """
    Every setup trains the same n_seeds seed pairs to T. `none` reports those finals;
    every other cell fine-tunes each final model for one epoch, keeping the run's own
    loss: `reshuffle` on the run's stock order for epoch T + 1, the ratio orders built
    with the run's shuffle seed.
    """
    if n_seeds < 3:
        raise ConfigError(f"mitigation comparison needs n_seeds >= 3, got {n_seeds}")
    if config.epochs == 0:
        raise ConfigError("mitigation comparison needs epochs >= 1")
    unknown = [s for s in setups if s not in SETUPS] + [p for p in post_orders if p not in POST_ORDERS]
    if unknown:
        raise ConfigError(f"unknown setups or post orders: {unknown}")
    builders = {
        "reshuffle": lambda train, batch_size, seed: epoch_order(reference_order(train.n, seed), config.epochs + 1),
        "equal_order": equal_order,
        "adv_order": adv_order,
    }
    points: list[dict[str, Any]] = []
    seeds: list[dict[str, Any]] = []
    for setup in setups:
        setup_config = config.model_copy(update={"loss": SETUP_LOSS[setup]})
        configs = seeded_configs(setup_config, n_seeds, master_seed)
        seeds += [{"setup": setup, **row} for row in seed_rows(configs)]
        results = run_many(splits, configs, jobs)
        for (run_id, run_config), result in zip(configs, results):
            for post in post_orders:
                if post == "none":
                    record: MetricRecord = result.trajectory.records[-1]
                else:
                    order = builders[post](splits.train, run_config.batch_size, run_config.shuffle_seed)
                    checkpoint = Checkpoint(run_id, run_config.epochs, result.model)
                    record = finetune(checkpoint, splits, batches(order, run_config.batch_size), run_config)
                points.append({"setup": setup, "post_order": post, "run_id": run_id,
                               "epoch": record.epoch, **{m: record.value(m) for m in REPORTED}})
        logger.info(f"Mitigation setup '{setup}' done over {n_seeds} seeds")
    cells = []
    for setup in setups:
        for post in post_orders:
            rows = [p for p in points if p["setup"] == setup and p["post_order"] == post]
            cells += [spread_row(spread(p[m] for p in rows), setup=setup, post_order=post, metric=m)
                      for m in REPORTED]
    return ExperimentReport(
        name="mitigate",
        config={"train": config, "n_seeds": n_seeds, "setups": list(setups),
                "post_orders": list(post_orders), "master_seed": master_seed},
        seeds=seeds,
        tables={"mitigate_points": points, "mitigate_cells": cells},
        summary={f"{c['setup']}/{c['post_order']}/{c['metric']}": c["median"] for c in cells},
    )
