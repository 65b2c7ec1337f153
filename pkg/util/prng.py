# -*- coding: utf-8 -*-
"""
    prng.py
    ~~~~~~~~~~~~~~~~~~~~~~
    Deterministic randomness for every experiment: a SplitMix64 generator held in a
    single 64-bit word, uniform and Gaussian sampling, bounded integers by
    multiply-high reduction and Fisher-Yates shuffling.

    A PrngState is an immutable value. Every operation returns the advanced state next
    to its result, so callers thread one stream explicitly and nothing is shared.
    SplitMix64 is counter based (output k is mix(state + k * gamma)), which lets the
    block helpers draw n values with numpy and stay bit-identical to n scalar calls.
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53

# Named stream labels are ASCII tags, far away from the small layer indices that
# weight initialization uses as its streams.
SHUFFLE_STREAM = 0x53485546464C45   # "SHUFFLE"
DROPOUT_STREAM = 0x44524F504F5554    # "DROPOUT"
DATA_STREAM = 0x53594E44415441      # "SYNDATA"
SPLIT_STREAM = 0x53504C4954          # "SPLIT"
ORDER_STREAM = 0x524154494F4F5244    # "RATIOORD"
SAMPLE_STREAM = 0x53414D504C45       # "SAMPLE"


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True, slots=True)
class PrngState:
    state: int

    def __post_init__(self):
        if not 0 <= self.state <= MASK64:
            raise ValueError(f"PRNG state must be a 64-bit unsigned integer, got {self.state}")


def prng_from(seed: int, stream: int = 0) -> PrngState:
    """
    Derive a generator state from a seed and a stream label.

    The stream label is scrambled and xor-ed into the seed, so (seed, 0) starts from
    `seed` itself and distinct labels give unrelated sequences.
    """
    seed &= MASK64
    stream &= MASK64
    return PrngState(seed ^ _mix((stream * GOLDEN_GAMMA) & MASK64))


def _advance(state: PrngState, steps: int) -> PrngState:
    return PrngState((state.state + steps * GOLDEN_GAMMA) & MASK64)


def next_u64(state: PrngState) -> tuple[int, PrngState]:
    advanced = _advance(state, 1)
    return _mix(advanced.state), advanced


def next_uniform(state: PrngState) -> tuple[float, PrngState]:
    """Top 53 bits of the next output scaled by 2^-53, always in [0, 1)."""
    raw, state = next_u64(state)
    return (raw >> 11) * _INV_2_53, state


def next_below(state: PrngState, bound: int) -> tuple[int, PrngState]:
    """Integer in [0, bound) by 64-bit multiply-high reduction."""
    if bound <= 0:
        raise ValueError(f"bound must be positive, got {bound}")
    raw, state = next_u64(state)
    return (raw * bound) >> 64, state


def u64_block(state: PrngState, n: int) -> tuple[np.ndarray, PrngState]:
    """The next n raw outputs as a uint64 array."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if n == 0:
        return np.empty(0, dtype=np.uint64), state
    steps = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(state.state) + steps * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
    return z, _advance(state, n)


def uniforms(state: PrngState, n: int) -> tuple[np.ndarray, PrngState]:
    raw, state = u64_block(state, n)
    return (raw >> np.uint64(11)).astype(np.float64) * _INV_2_53, state


def gaussians(state: PrngState, n: int) -> tuple[np.ndarray, PrngState]:
    """
    n standard normal variates by the polar Box-Muller method.

    Each attempt consumes two uniforms and keeps the first coordinate of an accepted
    pair, so the result equals n successive next_gaussian calls.
    """
    out = np.empty(n, dtype=np.float64)
    filled = 0
    while filled < n:
        need = n - filled
        pairs = max(8, int(need * 1.35) + 4)
        u, after = uniforms(state, 2 * pairs)
        x = 2.0 * u[0::2] - 1.0
        y = 2.0 * u[1::2] - 1.0
        s = x * x + y * y
        accepted = np.flatnonzero((s > 0.0) & (s < 1.0))
        take = accepted[:need]
        out[filled:filled + take.size] = x[take] * np.sqrt(-2.0 * np.log(s[take]) / s[take])
        filled += take.size
        if take.size == need:
            state = _advance(state, 2 * (int(take[-1]) + 1))
        else:
            state = after
    return out, state


def next_gaussian(state: PrngState) -> tuple[float, PrngState]:
    value, state = gaussians(state, 1)
    return float(value[0]), state


def _mulhi_bounded(raw: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    # (raw * bound) >> 64 with 32-bit limbs; exact for bound < 2^32
    hi = raw >> np.uint64(32)
    lo = raw & np.uint64(0xFFFFFFFF)
    return (hi * bounds + ((lo * bounds) >> np.uint64(32))) >> np.uint64(32)


def shuffle(items: Sequence[int] | np.ndarray, state: PrngState) -> tuple[np.ndarray, PrngState]:
    """
    Fisher-Yates shuffle.

    Iterates i from n-1 down to 1 and swaps position i with j drawn in [0, i].

    :param items: index sequence, left untouched
    :param state: generator state
    :return: shuffled copy as an int64 array and the advanced state
    """
    perm = np.array(items, dtype=np.int64).ravel()
    n = perm.size
    if n < 2:
        return perm, state
    if n > 0xFFFFFFFF:
        raise ValueError("shuffle supports at most 2^32 - 1 items")
    raw, state = u64_block(state, n - 1)
    bounds = np.arange(n, 1, -1, dtype=np.uint64)
    js = _mulhi_bounded(raw, bounds).tolist()
    values = perm.tolist()
    for i, j in zip(range(n - 1, 0, -1), js):
        values[i], values[j] = values[j], values[i]
    return np.asarray(values, dtype=np.int64), state
