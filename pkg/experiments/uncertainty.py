# -*- coding: utf-8 -*-
"""
experiments/uncertainty.py
Monte-Carlo dropout uncertainty per subgroup: the empirical CDF of per-example
prediction standard deviations and its deciles.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

from typing import Any

import numpy as np

from data.dataset import Dataset, Splits
from evaluation.stats import ecdf
from experiments.common import ExperimentReport, seed_rows, seeded_configs
from models.common import SUBGROUP_NAMES, TrainConfig
from models.network import Model, mc_dropout_uncertainty
from pipeline import train_run
from util.errors import ConfigError
from util.logger import get_logger

logger = get_logger("experiments.uncertainty")

DECILES = tuple(range(10, 100, 10))


def subgroup_uncertainty(model: Model, eval_set: Dataset, passes: int, dropout_rate: float,
                         seed: int) -> dict[str, np.ndarray]:
    stds = mc_dropout_uncertainty(model, eval_set.features, passes, dropout_rate, seed)
    codes = eval_set.subgroup_codes()
    return {name: stds[codes == k] for k, name in enumerate(SUBGROUP_NAMES)}


def uncertainty_profile(
    model: Model,
    eval_set: Dataset,
    passes: int = 1000,
    dropout_rate: float = 0.1,
    seed: int = 0,
) -> tuple[list[dict[str, Any]], list[dict[str, Any]]]:
    """
    ECDF points (subgroup, std, cdf) of per-example MC-dropout standard deviation, and
    per-subgroup deciles. Empty subgroups are skipped.
    """
    per_group = subgroup_uncertainty(model, eval_set, passes, dropout_rate, seed)
    points, deciles = [], []
    for name, stds in per_group.items():
        if stds.size == 0:
            logger.warning(f"subgroup {name} is empty in the evaluation set; no ECDF")
            continue
        support, cdf = ecdf(stds)
        points += [{"subgroup": name, "std": float(x), "cdf": float(c)} for x, c in zip(support, cdf)]
        for q, value in zip(DECILES, np.percentile(stds, DECILES)):
            deciles.append({"subgroup": name, "percentile": q, "std": float(value)})
    return points, deciles


def uncertainty_experiment(
    splits: Splits,
    config: TrainConfig,
    passes: int,
    dropout_rate: float,
    master_seed: int = 0,
) -> ExperimentReport:
    """Train one run, then profile its final model on the test split."""
    if not 0.0 < dropout_rate < 1.0:
        raise ConfigError(f"MC dropout needs a dropout_rate in (0, 1), got {dropout_rate}")
    configs = seeded_configs(config, 1, master_seed)
    run_id, run_config = configs[0]
    result = train_run(splits, run_config, run_id)
    points, deciles = uncertainty_profile(result.model, splits.test, passes, dropout_rate, master_seed)
    p90 = {row["subgroup"]: row["std"] for row in deciles if row["percentile"] == 90}
    logger.info("90th percentile MC-dropout std: "
                + ", ".join(f"{name}={value:.4f}" for name, value in p90.items()))
    return ExperimentReport(
        name="uncertainty",
        config={"train": config, "passes": passes, "dropout_rate": dropout_rate,
                "master_seed": master_seed},
        seeds=seed_rows(configs),
        trajectories=[result.trajectory],
        tables={"ecdf": [{"run_id": run_id, "epoch": config.epochs, **row} for row in points],
                "deciles": [{"run_id": run_id, "epoch": config.epochs, **row} for row in deciles]},
        summary={"p90_std": p90},
    )
