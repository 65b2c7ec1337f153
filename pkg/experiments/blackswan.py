# -*- coding: utf-8 -*-
"""
experiments/blackswan.py
Black-swan search: how good is the best checkpoint found among the last t epochs of s
runs? Two qualities over the (t, s) grid, each averaged over repeats with fresh seeds:
the lowest average odds found, and the Hausdorff distance between the (AO, F1) Pareto
front of the sample and the front of the full (t_max, s_max) sample.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

import math
from typing import Any, Sequence

import numpy as np

from data.dataset import Splits
from evaluation.stats import ParetoPoint, Trajectory, hausdorff, pareto_front
from experiments.common import ExperimentReport, run_many, seed_rows, seeded_configs
from models.common import TrainConfig
from util.errors import ConfigError
from util.logger import get_logger

logger = get_logger("experiments.blackswan")


def checkpoint_points(trajectories: Sequence[Trajectory], last_t: int) -> list[ParetoPoint]:
    """(AO, F1) of the last `last_t` epochs of every trajectory; NaN points are skipped."""
    points = []
    for traj in trajectories:
        for record in traj.records[len(traj.records) - last_t:]:
            if math.isfinite(record.avg_odds) and math.isfinite(record.f1):
                points.append(ParetoPoint(record.avg_odds, record.f1, traj.run_id, record.epoch))
    return points


def surface_for(trajectories: Sequence[Trajectory], t_max: int, s_max: int) -> np.ndarray:
    """(t_max, s_max, 2) array of (best AO, Hausdorff to the full front) for one repeat."""
    full = checkpoint_points(trajectories[:s_max], t_max)
    full_front = pareto_front(full) if full else None
    out = np.full((t_max, s_max, 2), math.nan)
    for t in range(1, t_max + 1):
        for s in range(1, s_max + 1):
            points = checkpoint_points(trajectories[:s], t)
            if not points:
                continue
            out[t - 1, s - 1, 0] = min(p.fairness for p in points)
            out[t - 1, s - 1, 1] = hausdorff(pareto_front(points), full_front)
    return out


def black_swan_surface(
    splits: Splits,
    config: TrainConfig,
    t_max: int,
    s_max: int,
    repeats: int,
    master_seed: int = 0,
    jobs: int = 1,
) -> ExperimentReport:
    """
    For each repeat, train s_max fresh both-random runs; cell (t, s) uses the first s
    runs and their last t epochs. Qualities are computed per repeat, then averaged.
    """
    if t_max < 1 or s_max < 1 or repeats < 1:
        raise ConfigError(f"t_max, s_max and repeats must be >= 1, got {t_max}, {s_max}, {repeats}")
    if t_max > config.epochs:
        raise ConfigError(f"t_max {t_max} exceeds epochs {config.epochs}")
    surfaces, seeds, fronts = [], [], []
    for rep in range(repeats):
        configs = seeded_configs(config, s_max, master_seed + 2 * s_max * rep, prefix=f"rep{rep:02d}_run")
        seeds += [{"repeat": rep, **row} for row in seed_rows(configs)]
        trajectories = [r.trajectory for r in run_many(splits, configs, jobs)]
        surfaces.append(surface_for(trajectories, t_max, s_max))
        full = checkpoint_points(trajectories, t_max)
        if full:
            fronts += [{"repeat": rep, "run_id": p.run_id, "epoch": p.epoch, "avg_odds": p.fairness,
                        "f1": p.performance} for p in pareto_front(full)]
        logger.info(f"Black-swan repeat {rep + 1}/{repeats} done")
    stacked = np.stack(surfaces)
    finite = np.isfinite(stacked)
    counts = finite.sum(axis=0)
    means = np.where(counts > 0, np.where(finite, stacked, 0.0).sum(axis=0) / np.maximum(counts, 1), math.nan)
    rows: list[dict[str, Any]] = []
    for t in range(1, t_max + 1):
        for s in range(1, s_max + 1):
            rows.append({"t": t, "s": s, "best_avg_odds": float(means[t - 1, s - 1, 0]),
                         "hausdorff": float(means[t - 1, s - 1, 1]),
                         "repeats": int(counts[t - 1, s - 1, 0])})
    return ExperimentReport(
        name="blackswan",
        config={"train": config, "t_max": t_max, "s_max": s_max, "repeats": repeats,
                "master_seed": master_seed},
        seeds=seeds,
        tables={"surface": rows, "front": fronts},
        summary={"best_avg_odds_full": rows[-1]["best_avg_odds"]},
    )
