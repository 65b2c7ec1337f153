import logging

import numpy as np
import pytest

import pipeline
from conftest import make_dataset
from data.dataset import reweighing_weights, split, synth_generate
from data.orders import DataOrder
from models.common import SynthSpec, TrainConfig
from models.network import init_model
from pipeline import mean_loss, resolve_sample_weights, train_epoch, train_run
from util.errors import ConfigError, OrderError


def params(model) -> np.ndarray:
    return np.concatenate([np.concatenate([l.weights.ravel(), l.biases.ravel()]) for l in model.layers])


def rows(trajectory) -> np.ndarray:
    return np.array([r.as_row() for r in trajectory.records], dtype=np.float64)


class TestTrainEpoch:
    def test_zero_learning_rate_keeps_model(self, small_splits, fast_config):
        config = fast_config.model_copy(update={"learning_rate": 0.0})
        model = init_model(small_splits.train.dim, config.hidden_sizes, 1)
        order = DataOrder(np.arange(small_splits.train.n))
        assert np.array_equal(params(train_epoch(model, small_splits.train, order, config, 1)), params(model))

    def test_deterministic(self, small_splits, fast_config):
        config = fast_config.model_copy(update={"dropout_rate": 0.2})
        model = init_model(small_splits.train.dim, config.hidden_sizes, 1)
        order = DataOrder(np.arange(small_splits.train.n)[::-1])
        a = train_epoch(model, small_splits.train, order, config, 3)
        b = train_epoch(model, small_splits.train, order, config, 3)
        assert np.array_equal(params(a), params(b))

    def test_one_step_per_batch(self, monkeypatch):
        train = make_dataset({(0, 1): 3, (1, 1): 2, (1, 0): 2, (0, 0): 3})
        config = TrainConfig(hidden_sizes=(3,), batch_size=4, epochs=1, record_window=(1, 1))
        sizes = []
        real_backward = pipeline.backward

        def counting_backward(cache, labels, *args):
            sizes.append(labels.size)
            return real_backward(cache, labels, *args)

        monkeypatch.setattr(pipeline, "backward", counting_backward)
        train_epoch(init_model(2, (3,), 0), train, DataOrder(np.arange(10)), config, 1)
        assert sizes == [4, 4, 2]

    def test_order_must_cover_training_split(self, small_splits, fast_config):
        model = init_model(small_splits.train.dim, fast_config.hidden_sizes, 1)
        with pytest.raises(OrderError):
            train_epoch(model, small_splits.train, DataOrder(np.arange(5)), fast_config, 1)

    def test_loss_decreases_on_separable_data(self):
        data = synth_generate(SynthSpec(n=300, dims=2, delta=4.0, sigma=0.5, seed=2))
        train = split(data, seed=0).train
        config = TrainConfig(hidden_sizes=(8,), learning_rate=0.1, batch_size=16, epochs=1,
                             record_window=(1, 1))
        model = init_model(train.dim, config.hidden_sizes, 0)
        before = mean_loss(model, train, config)
        for epoch in range(1, 11):
            model = train_epoch(model, train, DataOrder(np.arange(train.n)), config, epoch)
        assert mean_loss(model, train, config) < 0.5 * before


class TestTrainRun:
    def test_identical_seeds_identical_trajectories(self, small_splits, fast_config):
        a = train_run(small_splits, fast_config)
        b = train_run(small_splits, fast_config)
        assert np.array_equal(rows(a.trajectory), rows(b.trajectory), equal_nan=True)
        assert np.array_equal(params(a.model), params(b.model))

    def test_epochs_are_numbered_from_one(self, small_splits, fast_config):
        result = train_run(small_splits, fast_config)
        assert result.trajectory.epochs().tolist() == [1, 2, 3, 4, 5, 6]
        assert result.val_trajectory.epochs().tolist() == [1, 2, 3, 4, 5, 6]
        assert result.elapsed >= 0.0

    def test_training_loss_logged_every_epoch(self, small_splits, fast_config):
        messages = []
        handler = logging.Handler(logging.DEBUG)
        handler.emit = lambda record: messages.append(record.getMessage())
        level = pipeline.logger.level
        pipeline.logger.addHandler(handler)
        pipeline.logger.setLevel(logging.DEBUG)
        try:
            result = train_run(small_splits, fast_config)
        finally:
            pipeline.logger.removeHandler(handler)
            pipeline.logger.setLevel(level)
        losses = [m for m in messages if "loss=" in m]
        assert [m.split(":")[0] for m in losses] == [f"run000 epoch {t}" for t in range(1, 7)]
        assert f"loss={mean_loss(result.model, small_splits.train, fast_config):.6f}" in losses[-1]

    def test_same_shuffle_seed_same_orders(self, small_splits, fast_config, monkeypatch):
        seen: list[list[int]] = []
        real = pipeline.train_epoch

        def recording(model, train, order, config, epoch_index, weights=None):
            seen.append(order.indices.tolist())
            return real(model, train, order, config, epoch_index, weights)

        monkeypatch.setattr(pipeline, "train_epoch", recording)
        train_run(small_splits, fast_config.with_seeds(1, 42))
        first = list(seen)
        seen.clear()
        train_run(small_splits, fast_config.with_seeds(2, 42))
        assert seen == first
        seen.clear()
        train_run(small_splits, fast_config.with_seeds(1, 43))
        assert seen != first

    def test_zero_learning_rate_gives_flat_trajectory(self, small_splits, fast_config):
        config = fast_config.model_copy(update={"learning_rate": 0.0})
        result = train_run(small_splits, config)
        table = rows(result.trajectory)[:, 1:]
        assert np.array_equal(table, np.repeat(table[:1], len(table), axis=0), equal_nan=True)
        init = init_model(small_splits.train.dim, config.hidden_sizes, config.weight_seed)
        assert np.array_equal(params(result.model), params(init))

    def test_zero_epochs(self, small_splits, fast_config):
        config = fast_config.model_copy(update={"epochs": 0})
        result = train_run(small_splits, config)
        assert result.trajectory.records == []
        init = init_model(small_splits.train.dim, config.hidden_sizes, config.weight_seed)
        assert np.array_equal(params(result.model), params(init))

    @pytest.mark.parametrize("policy,expected", [("none", []), ("window", [2, 3, 4, 5, 6]),
                                                 ("all", [1, 2, 3, 4, 5, 6])])
    def test_checkpoint_policy(self, small_splits, fast_config, policy, expected):
        result = train_run(small_splits, fast_config.model_copy(update={"checkpoints": policy}))
        assert sorted(result.checkpoints) == expected
        if expected:
            assert np.array_equal(params(result.checkpoints[6]), params(result.model))

    def test_batch_larger_than_training_split(self, small_splits, fast_config):
        config = fast_config.model_copy(update={"batch_size": small_splits.train.n + 1})
        with pytest.raises(ConfigError):
            train_run(small_splits, config)

    @pytest.mark.parametrize("loss_kind", ["weighted_ce", "ce_plus_eo"])
    def test_other_losses_run_deterministically(self, small_splits, fast_config, loss_kind):
        config = fast_config.model_copy(update={"loss": loss_kind, "epochs": 3, "record_window": (1, 3)})
        a = train_run(small_splits, config)
        b = train_run(small_splits, config)
        assert np.array_equal(rows(a.trajectory), rows(b.trajectory), equal_nan=True)
        assert not np.array_equal(params(a.model), params(train_run(
            small_splits, config.model_copy(update={"loss": "plain_ce"})).model))


class TestSampleWeights:
    def test_weighted_ce_uses_reweighing(self, small_splits, fast_config):
        config = fast_config.model_copy(update={"loss": "weighted_ce"})
        weights = resolve_sample_weights(small_splits.train, config)
        assert np.array_equal(weights, reweighing_weights(small_splits.train))

    def test_plain_ce_has_no_weights(self, small_splits, fast_config):
        assert resolve_sample_weights(small_splits.train, fast_config) is None

    def test_explicit_weights_are_checked(self, small_splits, fast_config):
        with pytest.raises(ConfigError):
            resolve_sample_weights(small_splits.train, fast_config, np.ones(3))
        with pytest.raises(ConfigError):
            resolve_sample_weights(small_splits.train, fast_config, np.zeros(small_splits.train.n))
