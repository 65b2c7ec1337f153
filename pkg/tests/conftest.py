"""Shared fixtures: a small synthetic dataset, its splits and a fast training config."""

import numpy as np
import pytest

from data.dataset import Dataset, split, synth_generate
from models.common import SynthSpec, TrainConfig


@pytest.fixture(scope="session")
def small_dataset() -> Dataset:
    return synth_generate(SynthSpec(n=400, dims=4, seed=3))


@pytest.fixture(scope="session")
def small_splits(small_dataset):
    return split(small_dataset, (0.7, 0.1, 0.2), seed=1)


@pytest.fixture
def fast_config() -> TrainConfig:
    return TrainConfig(hidden_sizes=(8,), learning_rate=0.05, batch_size=16, epochs=6,
                       record_window=(2, 6), weight_seed=5, shuffle_seed=6)


def make_dataset(counts: dict[tuple[int, int], int], dim: int = 2) -> Dataset:
    """Dataset with the given (a, y) subgroup sizes; features are the row index."""
    labels, sensitive = [], []
    for (a, y), count in counts.items():
        labels += [y] * count
        sensitive += [a] * count
    n = len(labels)
    features = np.tile(np.arange(n, dtype=np.float64)[:, None], (1, dim))
    return Dataset(features, np.array(labels), np.array(sensitive), tuple(f"x{k}" for k in range(dim)))
