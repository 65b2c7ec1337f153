# -*- coding: utf-8 -*-
"""
evaluation/metrics.py
Group confusion counts and the metrics reported for every checkpoint: pooled F1,
average odds, equal opportunity, demographic parity (on prediction counts), overall and
per-subgroup accuracy. All values are percentages.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from models.common import REPORT_SUBGROUPS, SUBGROUPS
from util.errors import UndefinedMetricError
from util.logger import get_logger

logger = get_logger("metrics")

FAIRNESS_METRICS = ("avg_odds", "eopp", "dp")
METRIC_NAMES = ("f1", "avg_odds", "eopp", "dp", "acc",
                *(f"acc_a{a}y{y}" for a, y in REPORT_SUBGROUPS))


@dataclass(frozen=True)
class GroupConfusion:
    """Counts per sensitive value, indexed [a]."""
    tp: tuple[int, int]
    fp: tuple[int, int]
    tn: tuple[int, int]
    fn: tuple[int, int]

    def positives(self, a: int) -> int:
        return self.tp[a] + self.fn[a]

    def negatives(self, a: int) -> int:
        return self.fp[a] + self.tn[a]

    def predicted_positive(self, a: int) -> int:
        return self.tp[a] + self.fp[a]

    def tpr(self, a: int) -> float:
        if self.positives(a) == 0:
            raise UndefinedMetricError(f"group a={a} has no positives; TPR undefined")
        return self.tp[a] / self.positives(a)

    def fpr(self, a: int) -> float:
        if self.negatives(a) == 0:
            raise UndefinedMetricError(f"group a={a} has no negatives; FPR undefined")
        return self.fp[a] / self.negatives(a)


@dataclass(frozen=True)
class MetricRecord:
    epoch: int
    f1: float
    avg_odds: float
    eopp: float
    dp: float
    overall_accuracy: float
    subgroup_accuracy: dict[tuple[int, int], float]

    def __post_init__(self):
        if self.epoch < 1:
            raise ValueError(f"epochs are numbered from 1, got {self.epoch}")

    def value(self, metric: str) -> float:
        if metric == "acc":
            return self.overall_accuracy
        if metric.startswith("acc_a"):
            return self.subgroup_accuracy[(int(metric[5]), int(metric[7]))]
        return getattr(self, metric)

    def as_row(self) -> list:
        """Trajectory CSV row: epoch then METRIC_NAMES."""
        return [self.epoch, *(self.value(m) for m in METRIC_NAMES)]


def _as_int_arrays(*arrays) -> list[np.ndarray]:
    out = [np.asarray(a, dtype=np.int64).ravel() for a in arrays]
    if len({a.size for a in out}) != 1:
        raise ValueError(f"length mismatch: {[a.size for a in out]}")
    if out[0].size == 0:
        raise ValueError("metrics need at least one row")
    return out


def confusion(preds, labels, sensitive) -> GroupConfusion:
    preds, labels, sensitive = _as_int_arrays(preds, labels, sensitive)
    if any(np.any((v != 0) & (v != 1)) for v in (preds, labels, sensitive)):
        raise ValueError("preds, labels and sensitive must all be 0/1")
    cells = np.bincount(sensitive * 4 + labels * 2 + preds, minlength=8).tolist()
    # cells[a*4 + y*2 + p]
    return GroupConfusion(
        tp=(cells[3], cells[7]),
        fp=(cells[1], cells[5]),
        tn=(cells[0], cells[4]),
        fn=(cells[2], cells[6]),
    )


def f1(conf: GroupConfusion) -> float:
    """Pooled 100 * 2TP / (P + PP)."""
    tp = sum(conf.tp)
    positives = conf.positives(0) + conf.positives(1)
    predicted = conf.predicted_positive(0) + conf.predicted_positive(1)
    if positives + predicted == 0:
        raise UndefinedMetricError("no positives and no positive predictions; F1 undefined")
    return 100.0 * 2 * tp / (positives + predicted)


def average_odds(conf: GroupConfusion) -> float:
    return 100.0 * (abs(conf.tpr(0) - conf.tpr(1)) + abs(conf.fpr(0) - conf.fpr(1))) / 2.0


def equal_opportunity(conf: GroupConfusion) -> float:
    return 100.0 * abs(conf.tpr(0) - conf.tpr(1))


def demographic_parity(conf: GroupConfusion) -> float:
    """100 * (1 - min(c0/c1, c1/c0)) on predicted-positive counts c_a."""
    c0, c1 = conf.predicted_positive(0), conf.predicted_positive(1)
    if c0 == 0 or c1 == 0:
        raise UndefinedMetricError(f"a group has no positive predictions (c0={c0}, c1={c1}); DP undefined")
    return 100.0 * (1.0 - min(c0 / c1, c1 / c0))


def subgroup_accuracy(preds, labels, sensitive) -> dict[tuple[int, int], float]:
    preds, labels, sensitive = _as_int_arrays(preds, labels, sensitive)
    out = {}
    for a, y in SUBGROUPS:
        rows = (sensitive == a) & (labels == y)
        total = int(rows.sum())
        if total == 0:
            raise UndefinedMetricError(f"subgroup (a={a}, y={y}) is empty; accuracy undefined")
        out[(a, y)] = 100.0 * int((preds[rows] == y).sum()) / total
    return out


def overall_accuracy(preds, labels) -> float:
    preds, labels = _as_int_arrays(preds, labels)
    return 100.0 * int((preds == labels).sum()) / labels.size


def _or_nan(metric: Callable[[], float], name: str, epoch: int) -> float:
    try:
        return metric()
    except UndefinedMetricError as e:
        logger.warning(f"epoch {epoch}: {name} recorded as NaN ({e})")
        return math.nan


def evaluate_predictions(preds, labels, sensitive, epoch: int = 1) -> MetricRecord:
    """All metrics for one checkpoint; an undefined metric becomes NaN and is logged."""
    conf = confusion(preds, labels, sensitive)
    try:
        by_subgroup = subgroup_accuracy(preds, labels, sensitive)
    except UndefinedMetricError:
        p, y, a = _as_int_arrays(preds, labels, sensitive)
        by_subgroup = {}
        for cell in SUBGROUPS:
            rows = (a == cell[0]) & (y == cell[1])
            total = int(rows.sum())
            if total == 0:
                logger.warning(f"epoch {epoch}: subgroup a={cell[0]} y={cell[1]} is empty; accuracy recorded as NaN")
                by_subgroup[cell] = math.nan
            else:
                by_subgroup[cell] = 100.0 * int((p[rows] == cell[1]).sum()) / total
    return MetricRecord(
        epoch=epoch,
        f1=_or_nan(lambda: f1(conf), "f1", epoch),
        avg_odds=_or_nan(lambda: average_odds(conf), "avg_odds", epoch),
        eopp=_or_nan(lambda: equal_opportunity(conf), "eopp", epoch),
        dp=_or_nan(lambda: demographic_parity(conf), "dp", epoch),
        overall_accuracy=overall_accuracy(preds, labels),
        subgroup_accuracy=by_subgroup,
    )
