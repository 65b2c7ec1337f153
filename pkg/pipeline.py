# -*- coding: utf-8 -*-
"""
pipeline.py
Training pipeline for fairorder. One run initializes a model from the weight seed, derives
the reference order from the reshuffle seed, reshuffles it with the epoch number before
every epoch, performs one SGD step per batch, and evaluates every metric on the test
(and validation) split after each epoch. The same step loop serves every fine-tuning
experiment.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

import functools
import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from data.dataset import Dataset, Splits, reweighing_weights
from data.orders import DataOrder, batches, epoch_order, reference_order
from evaluation.metrics import MetricRecord, evaluate_predictions
from evaluation.stats import Trajectory
from models.common import TrainConfig
from models.network import EOTerm, Model, backward, forward, init_model, loss, predict, sgd_step
from util.errors import ConfigError, OrderError
from util.logger import get_logger
from util.prng import DROPOUT_STREAM, prng_from

logger = get_logger("pipeline")


def timeit(func):
    """
    Decorator to time a function's execution; the wrapped call returns (result, seconds).
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        end_time = time.perf_counter()
        return result, end_time - start_time
    return wrapper


@dataclass
class RunResult:
    trajectory: Trajectory        # test split
    val_trajectory: Trajectory    # validation split
    model: Model
    checkpoints: dict[int, Model] = field(default_factory=dict)
    elapsed: float = 0.0


def resolve_sample_weights(train: Dataset, config: TrainConfig,
                           sample_weights: np.ndarray | None = None) -> np.ndarray | None:
    """Explicit weights win; weighted_ce falls back to reweighing on the training split."""
    if sample_weights is not None:
        weights = np.asarray(sample_weights, dtype=np.float64)
        if weights.shape != (train.n,) or np.any(weights <= 0):
            raise ConfigError(f"sample weights must be {train.n} positive reals")
        return weights
    if config.loss == "weighted_ce":
        return reweighing_weights(train)
    return None


def train_batches(
    model: Model,
    train: Dataset,
    batch_list: Sequence[np.ndarray],
    config: TrainConfig,
    epoch_index: int,
    sample_weights: np.ndarray | None = None,
) -> Model:
    """
    One SGD step per batch, in the given order. Dropout masks come from the stream
    prng_from(epoch_index, DROPOUT_STREAM), threaded through the batches.
    """
    weights = resolve_sample_weights(train, config, sample_weights)
    stream = prng_from(epoch_index, DROPOUT_STREAM) if config.dropout_rate > 0 else None
    use_eo = config.loss == "ce_plus_eo"
    for rows in batch_list:
        if rows.size == 0:
            continue
        labels = train.labels[rows]
        logits, cache = forward(model, train.features[rows], config.dropout_rate, stream)
        stream = cache.dropout_prng
        grads = backward(
            cache,
            labels,
            None if weights is None else weights[rows],
            EOTerm(train.sensitive[rows], config.eo_lambda) if use_eo else None,
        )
        model = sgd_step(model, grads, config.learning_rate)
    return model


def train_epoch(
    model: Model,
    train: Dataset,
    order: DataOrder,
    config: TrainConfig,
    epoch_index: int,
    sample_weights: np.ndarray | None = None,
) -> Model:
    """Consume `order` left to right in batches of config.batch_size."""
    if len(order) != train.n:
        raise OrderError(f"order covers {len(order)} rows, training split has {train.n}")
    return train_batches(model, train, batches(order, config.batch_size), config,
                         epoch_index, sample_weights)


def evaluate_model(model: Model, dataset: Dataset, epoch: int) -> MetricRecord:
    return evaluate_predictions(predict(model, dataset.features), dataset.labels,
                                dataset.sensitive, epoch)


def mean_loss(model: Model, dataset: Dataset, config: TrainConfig,
              sample_weights: np.ndarray | None = None) -> float:
    """Training objective over the whole dataset, evaluation mode."""
    logits, _ = forward(model, dataset.features)
    weights = resolve_sample_weights(dataset, config, sample_weights)
    eo = EOTerm(dataset.sensitive, config.eo_lambda) if config.loss == "ce_plus_eo" else None
    return loss(logits, dataset.labels, weights, eo)


@timeit
def _run_epochs(splits: Splits, config: TrainConfig, run_id: str,
                sample_weights: np.ndarray | None) -> RunResult:
    train = splits.train
    weights = resolve_sample_weights(train, config, sample_weights)
    model = init_model(train.dim, config.hidden_sizes, config.weight_seed)
    reference = reference_order(train.n, config.shuffle_seed)
    result = RunResult(
        trajectory=Trajectory(run_id, config.weight_seed, config.shuffle_seed),
        val_trajectory=Trajectory(run_id, config.weight_seed, config.shuffle_seed),
        model=model,
    )
    t1, t2 = config.record_window
    for t in range(1, config.epochs + 1):
        model = train_epoch(model, train, epoch_order(reference, t), config, t, weights)
        record = evaluate_model(model, splits.test, t)
        result.trajectory.append(record)
        result.val_trajectory.append(evaluate_model(model, splits.val, t))
        if config.checkpoints == "all" or (config.checkpoints == "window" and t1 <= t <= t2):
            result.checkpoints[t] = model
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(f"{run_id} epoch {t}: loss={mean_loss(model, train, config, weights):.6f} "
                         f"f1={record.f1:.3f} ao={record.avg_odds:.3f}")
    result.model = model
    return result


def train_run(
    splits: Splits,
    config: TrainConfig,
    run_id: str = "run000",
    sample_weights: np.ndarray | None = None,
) -> RunResult:
    """
    Train for config.epochs epochs and record a MetricRecord per epoch.

    Epoch t trains on epoch_order(reference_order(n, shuffle_seed), t), so two runs with
    the same shuffle seed see identical orders whatever their weight seeds.
    """
    if config.batch_size > splits.train.n:
        raise ConfigError(f"batch_size {config.batch_size} exceeds the {splits.train.n} training rows")
    logger.info(f"Training {run_id}: weight_seed={config.weight_seed} "
                f"shuffle_seed={config.shuffle_seed} epochs={config.epochs} loss={config.loss}")
    result, elapsed = _run_epochs(splits, config, run_id, sample_weights)
    result.elapsed = elapsed
    logger.info(f"Finished {run_id} in {elapsed:.2f} seconds.")
    return result
