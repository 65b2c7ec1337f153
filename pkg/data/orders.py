# -*- coding: utf-8 -*-
"""
data/orders.py
Data orders: the r_s-seeded reference permutation, its per-epoch reshuffle seeded by the
epoch number, batching, and the ratio-controlled builder behind EqualOrder and AdvOrder.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

from dataclasses import dataclass

import numpy as np

from data.dataset import Dataset, largest_remainder, minority_positive_group
from models.common import SUBGROUPS, RatioSpec
from util.errors import OrderError
from util.logger import get_logger
from util.prng import ORDER_STREAM, SHUFFLE_STREAM, prng_from, shuffle

logger = get_logger("orders")

EQUAL_RATIO = 1.0
ADV_RATIO = 1.0 / 3.0


@dataclass(frozen=True, eq=False)
class DataOrder:
    """
    A permutation of the training indices.

    `suffix_start` marks where constructed batches begin; batching restarts there so
    those batches are consumed exactly as built. Plain orders leave it as None.
    """
    indices: np.ndarray
    suffix_start: int | None = None

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=np.int64)
        if not is_permutation(indices, indices.size):
            raise OrderError(f"order of length {indices.size} is not a permutation of [0, n)")
        if self.suffix_start is not None and not 0 <= self.suffix_start <= indices.size:
            raise OrderError(f"suffix_start {self.suffix_start} outside [0, {indices.size}]")
        indices.setflags(write=False)
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return int(self.indices.size)


def is_permutation(indices: np.ndarray, n: int) -> bool:
    indices = np.asarray(indices)
    if indices.shape != (n,):
        return False
    if n == 0:
        return True
    if indices.min() < 0 or indices.max() >= n:
        return False
    return bool(np.all(np.bincount(indices, minlength=n) == 1))


def reference_order(n: int, shuffle_seed: int) -> DataOrder:
    """shuffle(identity(n)) on the r_s stream."""
    if n < 1:
        raise OrderError(f"cannot order {n} items")
    indices, _ = shuffle(np.arange(n), prng_from(shuffle_seed, SHUFFLE_STREAM))
    return DataOrder(indices)


def epoch_order(reference: DataOrder, epoch: int) -> DataOrder:
    """Reshuffle the reference order with the epoch number as seed."""
    if epoch < 1:
        raise OrderError(f"epochs are numbered from 1, got {epoch}")
    indices, _ = shuffle(reference.indices, prng_from(epoch, SHUFFLE_STREAM))
    return DataOrder(indices)


def batches(order: DataOrder, batch_size: int) -> list[np.ndarray]:
    """Consecutive batches, the last one short when needed; restarts at the suffix."""
    if batch_size < 1:
        raise OrderError(f"batch_size must be positive, got {batch_size}")
    idx = order.indices
    cut = len(order) if order.suffix_start is None else order.suffix_start
    out = [idx[start:min(start + batch_size, cut)] for start in range(0, cut, batch_size)]
    out += [idx[start:start + batch_size] for start in range(cut, len(order), batch_size)]
    return out


def ratio_targets(train: Dataset, spec: RatioSpec) -> np.ndarray:
    """
    Subgroup proportions (SUBGROUPS order) for the suffix batches: the varied group keeps
    its empirical share split pos:neg = r, the other group keeps its empirical cells.
    """
    if not spec.pos_to_neg > 0:
        raise OrderError(f"ratio must be positive, got {spec.pos_to_neg}")
    props = train.subgroup_counts() / train.n
    pos = SUBGROUPS.index((spec.varied_group, 1))
    neg = SUBGROUPS.index((spec.varied_group, 0))
    share = props[pos] + props[neg]
    r = spec.pos_to_neg
    props[pos] = share * r / (1.0 + r)
    props[neg] = share / (1.0 + r)
    return props / props.sum()


def build_ratio_order(train: Dataset, spec: RatioSpec, batch_size: int, seed: int) -> DataOrder:
    """
    Order whose suffix batches hold a fixed subgroup composition.

    Each suffix batch draws the largest-remainder counts of batch_size * targets from
    per-subgroup pools (pre-shuffled). Construction stops at the first batch some pool
    cannot fill. Leftover rows are shuffled into the prefix and each constructed batch
    is shuffled internally. The result is a permutation of all training indices.
    """
    if batch_size < 4:
        raise OrderError(f"ratio orders need batch_size >= 4, got {batch_size}")
    counts = largest_remainder(batch_size, ratio_targets(train, spec))
    codes = train.subgroup_codes()
    stream = prng_from(seed, ORDER_STREAM)
    pools = []
    for code in range(len(SUBGROUPS)):
        pool, stream = shuffle(np.flatnonzero(codes == code), stream)
        pools.append(pool)
    cursor = [0] * len(pools)
    suffix: list[np.ndarray] = []
    while all(cursor[k] + counts[k] <= pools[k].size for k in range(len(pools))):
        parts = []
        for k, count in enumerate(counts):
            parts.append(pools[k][cursor[k]:cursor[k] + count])
            cursor[k] += int(count)
        batch, stream = shuffle(np.concatenate(parts), stream)
        suffix.append(batch)
    leftovers = np.concatenate([pool[cursor[k]:] for k, pool in enumerate(pools)])
    prefix, _ = shuffle(leftovers, stream)
    logger.debug(f"ratio order r={spec.pos_to_neg:.4f} group={spec.varied_group}: "
                 f"{len(suffix)} suffix batches of {counts.tolist()}, prefix {prefix.size}")
    return DataOrder(np.concatenate([prefix, *suffix]), suffix_start=int(prefix.size))


def equal_order(train: Dataset, batch_size: int, seed: int) -> DataOrder:
    """Suffix holds the minority-positive group's positives:negatives at 1:1."""
    spec = RatioSpec(varied_group=minority_positive_group(train), pos_to_neg=EQUAL_RATIO)
    return build_ratio_order(train, spec, batch_size, seed)


def adv_order(train: Dataset, batch_size: int, seed: int) -> DataOrder:
    """Suffix holds the minority-positive group's positives:negatives at 1:3."""
    spec = RatioSpec(varied_group=minority_positive_group(train), pos_to_neg=ADV_RATIO)
    return build_ratio_order(train, spec, batch_size, seed)
