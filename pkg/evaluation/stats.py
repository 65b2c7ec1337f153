# -*- coding: utf-8 -*-
"""
evaluation/stats.py
Statistics over metric trajectories: variance across runs and across epochs, Pearson
correlation and its mean over run pairs, empirical CDFs with the two-sample
Kolmogorov-Smirnov test, box-plot spreads, Pareto fronts and the Hausdorff distance.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import kolmogorov

from evaluation.metrics import MetricRecord
from util.errors import InsufficientSamplesError, UndefinedCorrelationError


@dataclass
class Trajectory:
    """Per-epoch metric records of one training run."""
    run_id: str
    weight_seed: int
    shuffle_seed: int
    records: list[MetricRecord] = field(default_factory=list)

    def __post_init__(self):
        epochs = [r.epoch for r in self.records]
        if any(b <= a for a, b in zip(epochs, epochs[1:])):
            raise ValueError(f"trajectory {self.run_id}: epochs must be strictly increasing")

    def append(self, record: MetricRecord) -> None:
        if self.records and record.epoch <= self.records[-1].epoch:
            raise ValueError(f"trajectory {self.run_id}: epoch {record.epoch} after "
                             f"{self.records[-1].epoch}")
        self.records.append(record)

    def epochs(self) -> np.ndarray:
        return np.array([r.epoch for r in self.records], dtype=np.int64)

    def values(self, metric: str) -> np.ndarray:
        return np.array([r.value(metric) for r in self.records], dtype=np.float64)

    def window(self, metric: str, t1: int, t2: int) -> np.ndarray:
        """Metric values for epochs t1..t2 inclusive; the window must lie inside the run."""
        epochs = self.epochs()
        if not self.records or t1 > t2 or t1 < epochs[0] or t2 > epochs[-1]:
            span = (int(epochs[0]), int(epochs[-1])) if self.records else None
            raise InsufficientSamplesError(f"window [{t1}, {t2}] outside trajectory "
                                           f"{self.run_id} epochs {span}")
        keep = (epochs >= t1) & (epochs <= t2)
        return self.values(metric)[keep]

    def final(self, metric: str) -> float:
        if not self.records:
            raise InsufficientSamplesError(f"trajectory {self.run_id} is empty")
        return self.records[-1].value(metric)


@dataclass(frozen=True)
class ParetoPoint:
    fairness: float     # lower is better
    performance: float  # higher is better
    run_id: str = ""
    epoch: int = 0


def population_variance(values: Iterable[float]) -> float:
    """Variance dividing by m."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size < 2:
        raise InsufficientSamplesError(f"variance needs >= 2 values, got {arr.size}")
    if np.all(arr == arr[0]):
        return 0.0
    return float(np.var(arr))


def var_across_runs(final_values: Sequence[float]) -> float:
    return population_variance(final_values)


def var_across_epochs(traj: Trajectory, t1: int, t2: int, metric: str = "avg_odds") -> float:
    return population_variance(traj.window(metric, t1, t2))


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"pearson needs equal-length vectors, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise InsufficientSamplesError(f"pearson needs >= 2 points, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise UndefinedCorrelationError("non-finite values; correlation undefined")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelationError("zero variance; correlation undefined")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("zero variance; correlation undefined")
    r = float(dx @ dy) / (math.sqrt(sxx) * math.sqrt(syy))
    return max(-1.0, min(1.0, r))


def mean_pairwise_pearson(trajectories: Sequence[Trajectory], metric: str, t1: int, t2: int) -> float:
    """Mean over unordered run pairs of the correlation of their metric-vs-epoch vectors."""
    if len(trajectories) < 2:
        raise InsufficientSamplesError("pairwise correlation needs >= 2 runs")
    windows = [t.window(metric, t1, t2) for t in trajectories]
    return float(np.mean([pearson(a, b) for a, b in itertools.combinations(windows, 2)]))


def ecdf(sample: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Sorted distinct support and the fraction of the sample <= each point."""
    arr = np.sort(np.asarray(sample, dtype=np.float64))
    if arr.size == 0:
        raise InsufficientSamplesError("ECDF of an empty sample")
    support = np.unique(arr)
    return support, np.searchsorted(arr, support, side="right") / arr.size


def ecdf_at(sample: Sequence[float], points: Sequence[float]) -> np.ndarray:
    arr = np.sort(np.asarray(sample, dtype=np.float64))
    if arr.size == 0:
        raise InsufficientSamplesError("ECDF of an empty sample")
    return np.searchsorted(arr, np.asarray(points, dtype=np.float64), side="right") / arr.size


@dataclass(frozen=True)
class KSResult:
    statistic: float
    p_value: float
    n_a: int
    n_b: int


def ks_two_sample(sample_a: Sequence[float], sample_b: Sequence[float]) -> KSResult:
    """
    D = sup |ECDF_a - ECDF_b| with the asymptotic Kolmogorov p-value at
    lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * D, ne = na*nb/(na+nb).
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise InsufficientSamplesError("KS test needs two non-empty samples")
    pooled = np.concatenate([a, b])
    d = float(np.max(np.abs(ecdf_at(a, pooled) - ecdf_at(b, pooled))))
    ne = a.size * b.size / (a.size + b.size)
    lam = (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne)) * d
    p = float(kolmogorov(lam))
    p = min(1.0, max(p, np.finfo(np.float64).tiny))
    return KSResult(statistic=d, p_value=p, n_a=int(a.size), n_b=int(b.size))


@dataclass(frozen=True)
class Spread:
    """Box-plot summary of finite values; NaNs are dropped and counted out."""
    count: int
    median: float
    q1: float
    q3: float
    min: float
    max: float
    variance: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def spread(values: Iterable[float]) -> Spread:
    arr = np.asarray(list(values), dtype=np.float64)
    arr = arr[np.isfinite(arr)]
    if arr.size == 0:
        nan = math.nan
        return Spread(0, nan, nan, nan, nan, nan, nan)
    q1, median, q3 = np.percentile(arr, [25, 50, 75])
    return Spread(int(arr.size), float(median), float(q1), float(q3),
                  float(arr.min()), float(arr.max()), float(np.var(arr)))


def epoch_bands(trajectories: Sequence[Trajectory], metric: str, t1: int, t2: int) -> list[dict]:
    """Per-epoch spread of `metric` across runs over [t1, t2]."""
    windows = np.vstack([t.window(metric, t1, t2) for t in trajectories])
    rows = []
    for offset, epoch in enumerate(range(t1, t2 + 1)):
        s = spread(windows[:, offset])
        rows.append({"metric": metric, "epoch": epoch, "median": s.median, "q1": s.q1,
                     "q3": s.q3, "min": s.min, "max": s.max})
    return rows


def _coords(points: Sequence[ParetoPoint] | np.ndarray) -> np.ndarray:
    if isinstance(points, np.ndarray):
        arr = points.astype(np.float64).reshape(-1, 2)
    else:
        arr = np.array([(p.fairness, p.performance) for p in points], dtype=np.float64).reshape(-1, 2)
    if arr.shape[0] == 0:
        raise InsufficientSamplesError("empty point set")
    return arr


def pareto_front(points: Sequence[ParetoPoint]) -> list[ParetoPoint]:
    """
    Points not dominated under (fairness <=, performance >=) with one strict inequality.
    Coordinate duplicates are kept once (first occurrence); output sorted by fairness.
    """
    if not points:
        raise InsufficientSamplesError("Pareto front of an empty set")
    seen: dict[tuple[float, float], ParetoPoint] = {}
    for p in points:
        seen.setdefault((p.fairness, p.performance), p)
    unique = list(seen.values())
    xy = _coords(unique)
    fair, perf = xy[:, 0], xy[:, 1]
    no_worse = (fair[:, None] <= fair[None, :]) & (perf[:, None] >= perf[None, :])
    strictly = (fair[:, None] < fair[None, :]) | (perf[:, None] > perf[None, :])
    dominated = np.any(no_worse & strictly, axis=0)  # column j dominated by some row i
    front = [p for p, d in zip(unique, dominated) if not d]
    return sorted(front, key=lambda p: (p.fairness, -p.performance))


def hausdorff(set_a: Sequence[ParetoPoint] | np.ndarray, set_b: Sequence[ParetoPoint] | np.ndarray) -> float:
    """Symmetric Hausdorff distance, Euclidean in raw percentage coordinates."""
    dist = cdist(_coords(set_a), _coords(set_b))
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))
