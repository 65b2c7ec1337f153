import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_dataset
from data.dataset import largest_remainder
from data.orders import (
    DataOrder,
    adv_order,
    batches,
    build_ratio_order,
    epoch_order,
    equal_order,
    is_permutation,
    ratio_targets,
    reference_order,
)
from models.common import SUBGROUPS, RatioSpec
from util.errors import OrderError

# pools (F+, F-, M+, M-) = (10, 30, 20, 40)
POOLS = {(0, 1): 10, (0, 0): 30, (1, 1): 20, (1, 0): 40}


def subgroup_of(dataset, rows):
    codes = dataset.subgroup_codes()[rows]
    return np.bincount(codes, minlength=4)


class TestReferenceAndEpochOrders:
    def test_single_row(self):
        assert reference_order(1, 9).indices.tolist() == [0]

    @given(st.integers(min_value=1, max_value=500), st.integers(min_value=0, max_value=2**64 - 1))
    @settings(max_examples=50)
    def test_reference_is_permutation_and_deterministic(self, n, seed):
        a = reference_order(n, seed)
        assert sorted(a.indices.tolist()) == list(range(n))
        assert np.array_equal(a.indices, reference_order(n, seed).indices)

    def test_epoch_order_depends_on_reference_and_epoch(self):
        ref = reference_order(100, 3)
        assert np.array_equal(epoch_order(ref, 4).indices, epoch_order(reference_order(100, 3), 4).indices)
        assert sorted(epoch_order(ref, 4).indices.tolist()) == sorted(ref.indices.tolist())
        assert not np.array_equal(epoch_order(ref, 4).indices, epoch_order(ref, 5).indices)

    def test_different_reshuffle_seeds_differ(self):
        for seed in range(20):
            a = epoch_order(reference_order(100, 2 * seed), 7)
            b = epoch_order(reference_order(100, 2 * seed + 1), 7)
            assert not np.array_equal(a.indices, b.indices)

    def test_epochs_start_at_one(self):
        with pytest.raises(OrderError):
            epoch_order(reference_order(5, 0), 0)

    def test_not_a_permutation(self):
        with pytest.raises(OrderError):
            DataOrder(np.array([0, 0, 1]))
        assert not is_permutation(np.array([1, 2]), 2)


class TestBatches:
    def test_final_short_batch(self):
        sizes = [b.size for b in batches(DataOrder(np.arange(10)), 4)]
        assert sizes == [4, 4, 2]

    def test_restart_at_suffix(self):
        order = DataOrder(np.arange(13), suffix_start=3)
        parts = batches(order, 5)
        assert [p.tolist() for p in parts] == [[0, 1, 2], [3, 4, 5, 6, 7], [8, 9, 10, 11, 12]]

    def test_batches_cover_order(self):
        order = reference_order(37, 1)
        assert np.array_equal(np.concatenate(batches(order, 8)), order.indices)


class TestRatioOrder:
    def test_hand_enumerated_example(self):
        train = make_dataset(POOLS)
        order = build_ratio_order(train, RatioSpec(varied_group=0, pos_to_neg=1.0), 10, seed=0)
        assert is_permutation(order.indices, 100)
        assert order.suffix_start == 50
        suffix = batches(order, 10)[-5:]
        assert len(batches(order, 10)) == 10
        # SUBGROUPS order: F+, M+, M-, F-
        for batch in suffix:
            assert subgroup_of(train, batch).tolist() == [2, 2, 4, 2]

    def test_equal_order_matches_ratio_example(self):
        train = make_dataset(POOLS)
        a = equal_order(train, 10, seed=4)
        b = build_ratio_order(train, RatioSpec(varied_group=0, pos_to_neg=1.0), 10, seed=4)
        assert np.array_equal(a.indices, b.indices)

    def test_adv_targets(self):
        train = make_dataset(POOLS)
        targets = ratio_targets(train, RatioSpec(varied_group=0, pos_to_neg=1 / 3))
        fp, fn = targets[SUBGROUPS.index((0, 1))], targets[SUBGROUPS.index((0, 0))]
        assert fp == pytest.approx(0.10)
        assert fn == pytest.approx(0.30)
        assert adv_order(train, 10, seed=1).suffix_start is not None

    def test_self_consistent_ratio_covers_everything(self):
        train = make_dataset({(0, 1): 10, (0, 0): 30, (1, 1): 20, (1, 0): 40})
        order = build_ratio_order(train, RatioSpec(varied_group=0, pos_to_neg=1 / 3), 10, seed=2)
        assert order.suffix_start == 0
        assert is_permutation(order.indices, 100)

    @given(st.tuples(*[st.integers(min_value=1, max_value=60)] * 4),
           st.sampled_from([0, 1]),
           st.floats(min_value=0.05, max_value=20.0),
           st.integers(min_value=4, max_value=16),
           st.integers(min_value=0, max_value=1000))
    @settings(max_examples=60, deadline=None)
    def test_always_a_permutation_with_exact_batches(self, counts, group, ratio, batch_size, seed):
        train = make_dataset(dict(zip(SUBGROUPS, counts)))
        spec = RatioSpec(varied_group=group, pos_to_neg=ratio)
        order = build_ratio_order(train, spec, batch_size, seed)
        assert is_permutation(order.indices, train.n)
        suffix = order.indices[order.suffix_start:]
        assert suffix.size % batch_size == 0
        expected = largest_remainder(batch_size, ratio_targets(train, spec)).tolist()
        for start in range(0, suffix.size, batch_size):
            assert subgroup_of(train, suffix[start:start + batch_size]).tolist() == expected

    def test_small_batch_and_bad_ratio_rejected(self):
        train = make_dataset(POOLS)
        with pytest.raises(OrderError):
            build_ratio_order(train, RatioSpec(pos_to_neg=1.0), 3, seed=0)
        with pytest.raises(Exception):
            RatioSpec(pos_to_neg=0.0)
