# -*- coding: utf-8 -*-
"""
experiments/proxy.py
Single-run proxy: compare the distribution of final average odds across many runs with
the distribution of average odds across the epochs of one run, by histogram and the
two-sample Kolmogorov-Smirnov test.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from data.dataset import Splits
from evaluation.stats import KSResult, ks_two_sample
from experiments.common import ExperimentReport, run_many, seed_rows, seed_schedule, seeded_configs
from models.common import TrainConfig
from util.errors import ConfigError, InsufficientSamplesError
from util.logger import get_logger

logger = get_logger("experiments.proxy")

MIN_SAMPLE = 5


@dataclass(frozen=True)
class ProxyResult:
    ks: KSResult
    histogram: list[dict[str, Any]]


def _finite(values: Sequence[float], label: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    arr = arr[np.isfinite(arr)]
    if arr.size < MIN_SAMPLE:
        raise InsufficientSamplesError(f"{label} has {arr.size} finite values, need >= {MIN_SAMPLE}")
    return arr


def single_run_proxy(multi_run_finals: Sequence[float], single_run_window: Sequence[float],
                     bins: int = 10) -> ProxyResult:
    """Histograms on shared bin edges (as fractions of each sample) and the KS result."""
    multi = _finite(multi_run_finals, "multi-run sample")
    single = _finite(single_run_window, "single-run sample")
    edges = np.histogram_bin_edges(np.concatenate([multi, single]), bins=bins)
    histogram = []
    for label, sample in (("multi_run", multi), ("single_run", single)):
        counts, _ = np.histogram(sample, bins=edges)
        histogram += [{"sample": label, "bin_left": float(lo), "bin_right": float(hi),
                       "count": int(c), "fraction": c / sample.size}
                      for lo, hi, c in zip(edges[:-1], edges[1:], counts)]
    return ProxyResult(ks_two_sample(multi, single), histogram)


def proxy_experiment(
    splits: Splits,
    config: TrainConfig,
    n_runs: int,
    stopping_epochs: Sequence[int] | None = None,
    bins: int = 10,
    master_seed: int = 0,
    jobs: int = 1,
) -> ExperimentReport:
    """
    n_runs both-random runs give the multi-run sample at each stopping epoch (default
    the last); one extra run gives the single-run sample over [T1, T2].
    """
    stops = list(stopping_epochs or [config.epochs])
    bad = [e for e in stops if not 1 <= e <= config.epochs]
    if bad:
        raise ConfigError(f"stopping epochs {bad} outside [1, {config.epochs}]")
    configs = seeded_configs(config, n_runs, master_seed)
    configs.append(("single", config.with_seeds(*seed_schedule(master_seed, n_runs))))
    results = run_many(splits, configs, jobs)
    multi, single = results[:-1], results[-1].trajectory
    t1, t2 = config.record_window
    window = single.window("avg_odds", t1, t2)
    ks_rows, histogram = [], []
    for stop in stops:
        finals = [r.trajectory.records[stop - 1].avg_odds for r in multi]
        result = single_run_proxy(finals, window, bins)
        ks_rows.append({"stopping_epoch": stop, "statistic": result.ks.statistic,
                        "p_value": result.ks.p_value, "n_multi": result.ks.n_a,
                        "n_single": result.ks.n_b, "t1": t1, "t2": t2})
        histogram += [{"stopping_epoch": stop, **row} for row in result.histogram]
        logger.info(f"KS at stopping epoch {stop}: D={result.ks.statistic:.4f} p={result.ks.p_value:.4f}")
    return ExperimentReport(
        name="proxy",
        config={"train": config, "n_runs": n_runs, "stopping_epochs": stops, "bins": bins,
                "master_seed": master_seed},
        seeds=seed_rows(configs),
        trajectories=[r.trajectory for r in results],
        tables={"ks": ks_rows, "histogram": histogram},
        summary={"single_run_id": "single"},
    )
