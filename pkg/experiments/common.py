# -*- coding: utf-8 -*-
"""
experiments/common.py
Plumbing shared by every experiment: the seed schedule, the report container, parallel
execution of independent runs, checkpoint pools and one-shot fine-tuning.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Literal, Sequence

import numpy as np

from data.dataset import Splits
from evaluation.metrics import MetricRecord
from evaluation.stats import Spread, Trajectory
from models.common import MAX_SEED, TrainConfig
from models.network import Model
from pipeline import RunResult, evaluate_model, train_batches, train_run
from util.errors import ConfigError
from util.logger import get_logger
from util.prng import SAMPLE_STREAM, prng_from, shuffle

logger = get_logger("experiments")

DecoupleMode = Literal["both_random", "fixed_reshuffle", "fixed_weight_init", "fixed_both"]
DECOUPLE_MODES: tuple[str, ...] = ("both_random", "fixed_reshuffle", "fixed_weight_init", "fixed_both")


def seed_schedule(master_seed: int, index: int, mode: DecoupleMode = "both_random") -> tuple[int, int]:
    """
    (weight_seed, shuffle_seed) of run `index`: master+2i and master+2i+1, except that
    fixed_reshuffle pins the shuffle seed to master+1 and fixed_weight_init pins the
    weight seed to master.
    """
    if mode not in DECOUPLE_MODES:
        raise ConfigError(f"unknown decouple mode '{mode}'")
    weight_seed = master_seed + 2 * index
    shuffle_seed = master_seed + 2 * index + 1
    if mode in ("fixed_reshuffle", "fixed_both"):
        shuffle_seed = master_seed + 1
    if mode in ("fixed_weight_init", "fixed_both"):
        weight_seed = master_seed
    return weight_seed & MAX_SEED, shuffle_seed & MAX_SEED


@dataclass
class ExperimentReport:
    """
    Everything an experiment produced. Table rows are flat dicts that carry their own
    provenance columns (run_id, epoch, metric, ...); the config echo is enough to rerun.
    """
    name: str
    config: dict[str, Any]
    seeds: list[dict[str, Any]] = field(default_factory=list)
    trajectories: list[Trajectory] = field(default_factory=list)
    tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)


@dataclass
class Checkpoint:
    run_id: str
    epoch: int
    model: Model


def _train_task(task: tuple[Splits, TrainConfig, str, np.ndarray | None]) -> RunResult:
    splits, config, run_id, weights = task
    return train_run(splits, config, run_id, weights)


def run_many(
    splits: Splits,
    configs: Sequence[tuple[str, TrainConfig]],
    jobs: int = 1,
    sample_weights: np.ndarray | None = None,
) -> list[RunResult]:
    """
    Train independent runs, in parallel when jobs > 1. Results come back in input
    order whatever the completion order.
    """
    tasks = [(splits, config, run_id, sample_weights) for run_id, config in configs]
    if jobs <= 1 or len(tasks) <= 1:
        return [_train_task(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_train_task, tasks))


def seeded_configs(base: TrainConfig, n_runs: int, master_seed: int,
                   mode: DecoupleMode = "both_random", prefix: str = "run") -> list[tuple[str, TrainConfig]]:
    out = []
    for i in range(n_runs):
        weight_seed, shuffle_seed = seed_schedule(master_seed, i, mode)
        out.append((f"{prefix}{i:03d}", base.with_seeds(weight_seed, shuffle_seed)))
    return out


def seed_rows(configs: Sequence[tuple[str, TrainConfig]]) -> list[dict[str, Any]]:
    return [{"run_id": run_id, "weight_seed": c.weight_seed, "shuffle_seed": c.shuffle_seed}
            for run_id, c in configs]


def sample_checkpoint_pool(
    splits: Splits,
    config: TrainConfig,
    n_runs: int,
    n_checkpoints: int,
    master_seed: int,
    jobs: int = 1,
) -> tuple[list[Checkpoint], list[dict[str, Any]]]:
    """
    Uniform sample of (run, epoch) checkpoints from epochs [T1, T2] of n_runs
    both-random runs. Returns the checkpoints sorted by (run, epoch) and the seeds used.
    """
    configs = seeded_configs(config.model_copy(update={"checkpoints": "window"}),
                             n_runs, master_seed, "both_random", prefix="pool")
    results = run_many(splits, configs, jobs)
    candidates = [(r.trajectory.run_id, epoch, model)
                  for r in results for epoch, model in sorted(r.checkpoints.items())]
    if n_checkpoints > len(candidates):
        raise ConfigError(f"asked for {n_checkpoints} checkpoints, only {len(candidates)} available")
    picked, _ = shuffle(np.arange(len(candidates)), prng_from(master_seed, SAMPLE_STREAM))
    chosen = sorted(picked[:n_checkpoints].tolist())
    logger.info(f"Sampled {n_checkpoints} checkpoints from {n_runs} runs")
    return [Checkpoint(*candidates[i]) for i in chosen], seed_rows(configs)


def finetune(
    checkpoint: Checkpoint,
    splits: Splits,
    batch_list: Sequence[np.ndarray],
    config: TrainConfig,
    sample_weights: np.ndarray | None = None,
) -> MetricRecord:
    """Train a checkpoint on the given batches (one pass) and evaluate on the test split."""
    epoch = checkpoint.epoch + 1
    model = train_batches(checkpoint.model, splits.train, batch_list, config, epoch, sample_weights)
    return evaluate_model(model, splits.test, epoch)


def spread_row(spread: Spread, **provenance: Any) -> dict[str, Any]:
    return {**provenance, "count": spread.count, "median": spread.median, "q1": spread.q1,
            "q3": spread.q3, "iqr": spread.iqr, "min": spread.min, "max": spread.max,
            "variance": spread.variance}
