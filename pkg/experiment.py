"""
    experiment.py
    ~~~~~~~~~~~~~~~~~~~~~~
    Command-line entry point of fairorder. Every subcommand loads the run configuration
    (defaults < preset < config file < flags), runs one experiment and writes its
    outputs into the output directory: report.json, trajectory_<run>.csv files and one
    long-format CSV per result table.

    Exit codes: 0 on success, 1 on invalid configuration or data, 2 on any other failure.
"""
# -*- coding: utf-8 -*-
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

import pandas as pd
from pydantic import ValidationError

from data.dataset import Splits, load_csv, save_csv, split, synth_generate, with_sensitive_feature
from evaluation.metrics import METRIC_NAMES, evaluate_predictions
from experiments.blackswan import black_swan_surface
from experiments.changes import change_tracking_experiment
from experiments.common import ExperimentReport, seed_rows
from experiments.decouple import correlation_table, decouple_experiment
from experiments.manipulate import manipulate_experiment
from experiments.mitigate import mitigation_compare
from experiments.proxy import proxy_experiment
from experiments.suffix import suffix_experiment
from experiments.uncertainty import uncertainty_experiment
from models.runconfig import PRESETS, RunConfigFile, load_run_config
from pipeline import train_run
from util.errors import ConfigError, DatasetError, EmptyDatasetError, MissingColumnError, NonBinaryValueError
from util.logger import setup_logger
from util.reportdump import write_csv, write_json, write_table

EXIT_OK, EXIT_INVALID, EXIT_FAILURE = 0, 1, 2
TRAJECTORY_HEADER = ("epoch", *METRIC_NAMES)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="JSON run configuration file.")
    common.add_argument("--preset", choices=sorted(PRESETS), help="Named defaults applied before the file.")
    common.add_argument("--out", type=str, help="Output directory (overrides output_dir).")
    common.add_argument("--jobs", type=int, help="Runs trained in parallel.")
    common.add_argument("--seed", type=int, help="Master seed.")
    common.add_argument("--epochs", type=int, help="Training epochs T.")
    common.add_argument("--window", type=int, nargs=2, metavar=("T1", "T2"), help="Record window.")
    common.add_argument("--lr", type=float, help="Learning rate.")
    common.add_argument("--batch-size", type=int, help="Mini-batch size.")
    common.add_argument("--dropout", type=float, help="Dropout rate during training.")
    common.add_argument("--loss", choices=("plain_ce", "weighted_ce", "ce_plus_eo"), help="Training loss.")
    common.add_argument("--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    common.add_argument("--log-file", type=str, help="Also log to this (rotating) file.")
    common.add_argument("--json-logs", action="store_true", help="Log JSON lines instead of text.")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(description="Fairness variance from training randomness.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("generate", parents=[common], help="Write the synthetic dataset as CSV.")
    p = sub.add_parser("train", parents=[common], help="One training run with its trajectory.")
    p.add_argument("--weight-seed", type=int)
    p.add_argument("--shuffle-seed", type=int)
    p = sub.add_parser("decouple", parents=[common], help="Weight-init vs reshuffling runs.")
    p.add_argument("--mode", choices=("both_random", "fixed_reshuffle", "fixed_weight_init", "fixed_both"))
    p.add_argument("--runs", type=int)
    p = sub.add_parser("correlate", parents=[common], help="Pairwise Pearson table over variants.")
    p.add_argument("--runs", type=int)
    sub.add_parser("changes", parents=[common], help="Prediction-change tracking.")
    p = sub.add_parser("uncertainty", parents=[common], help="MC-dropout uncertainty per subgroup.")
    p.add_argument("--passes", type=int)
    p.add_argument("--mc-dropout", type=float)
    p = sub.add_parser("suffix", parents=[common], help="Fine-tuning on a common order suffix.")
    p.add_argument("--b-values", type=int, nargs="+")
    p.add_argument("--variant", choices=("suffix", "random_batches"))
    p = sub.add_parser("manipulate", parents=[common], help="Subgroup accuracy vs forced ratio.")
    p.add_argument("--ratios", type=str, nargs="+", help="e.g. 1:8 1:1 8:1")
    p.add_argument("--varied-group", type=int, choices=(0, 1))
    p = sub.add_parser("proxy", parents=[common], help="Single-run proxy with the KS test.")
    p.add_argument("--runs", type=int)
    p.add_argument("--stopping-epochs", type=int, nargs="+")
    p = sub.add_parser("blackswan", parents=[common], help="Best-checkpoint quality surface.")
    p.add_argument("--t-max", type=int)
    p.add_argument("--s-max", type=int)
    p.add_argument("--repeats", type=int)
    p = sub.add_parser("mitigate", parents=[common], help="Custom orders vs mitigation baselines.")
    p.add_argument("--n-seeds", type=int)
    p = sub.add_parser("metrics", parents=[common], help="Metrics of a predictions CSV.")
    p.add_argument("--predictions", type=str, required=True)
    p.add_argument("--pred-column", type=str, default="pred")
    p.add_argument("--label-column", type=str, default="y")
    p.add_argument("--sensitive-column", type=str, default="a")
    return parser


FLAG_PATHS: dict[str, tuple[str, ...]] = {
    "out": ("output_dir",),
    "jobs": ("jobs",),
    "seed": ("master_seed",),
    "epochs": ("train", "epochs"),
    "window": ("train", "record_window"),
    "lr": ("train", "learning_rate"),
    "batch_size": ("train", "batch_size"),
    "dropout": ("train", "dropout_rate"),
    "loss": ("train", "loss"),
    "weight_seed": ("train", "weight_seed"),
    "shuffle_seed": ("train", "shuffle_seed"),
    "mode": ("experiment", "mode"),
    "runs": ("experiment", "n_runs"),
    "passes": ("experiment", "passes"),
    "mc_dropout": ("experiment", "mc_dropout_rate"),
    "b_values": ("experiment", "b_values"),
    "variant": ("experiment", "suffix_variant"),
    "ratios": ("experiment", "ratio_values"),
    "varied_group": ("experiment", "varied_group"),
    "stopping_epochs": ("experiment", "stopping_epochs"),
    "t_max": ("experiment", "t_max"),
    "s_max": ("experiment", "s_max"),
    "repeats": ("experiment", "repeats"),
    "n_seeds": ("experiment", "n_seeds"),
}


def flag_overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Nested override dict of every flag the user actually gave."""
    out: dict[str, Any] = {}
    for flag, path in FLAG_PATHS.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        node = out
        for key in path[:-1]:
            node = node.setdefault(key, {})
        node[path[-1]] = list(value) if isinstance(value, (list, tuple)) else value
    return out


def load_splits(config: RunConfigFile) -> Splits:
    source = config.dataset
    if source.source == "csv":
        dataset = load_csv(source.csv_path, source.label_column, source.sensitive_column)
    else:
        dataset = synth_generate(source.synthetic)
    if source.sensitive_as_feature:
        dataset = with_sensitive_feature(dataset, source.sensitive_column)
    return split(dataset, config.split.ratios, config.split.seed)


def write_report(report: ExperimentReport, config: RunConfigFile, out_dir: Path) -> Path:
    """report.json plus trajectory and table CSVs; returns the report path."""
    trajectory_files = []
    for traj in report.trajectories:
        name = f"trajectory_{traj.run_id}.csv"
        write_csv(out_dir / name, TRAJECTORY_HEADER, (r.as_row() for r in traj.records))
        trajectory_files.append(name)
    table_files = {}
    for table, rows in sorted(report.tables.items()):
        write_table(out_dir / f"{table}.csv", rows)
        table_files[table] = f"{table}.csv"
    return write_json(out_dir / "report.json", {
        "experiment": report.name,
        "run_config": config,
        "params": report.config,
        "seeds": report.seeds,
        "summary": report.summary,
        "trajectory_files": trajectory_files,
        "table_files": table_files,
    })


def cmd_generate(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    if config.dataset.source != "synthetic":
        raise ConfigError("generate needs dataset.source 'synthetic'")
    dataset = synth_generate(config.dataset.synthetic)
    out = Path(config.output_dir) / "dataset.csv"
    save_csv(dataset, out, config.dataset.label_column, config.dataset.sensitive_column)
    counts = dataset.subgroup_counts().tolist()
    return ExperimentReport("generate", {"synthetic": config.dataset.synthetic},
                            summary={"rows": dataset.n, "subgroup_counts": counts, "file": out.name})


def cmd_train(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    splits = load_splits(config)
    result = train_run(splits, config.train, "run000")
    val = result.val_trajectory
    val.run_id = "run000_val"
    return ExperimentReport("train", {"train": config.train},
                            seeds=seed_rows([("run000", config.train)]),
                            trajectories=[result.trajectory, val])


def cmd_decouple(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    exp = config.experiment
    return decouple_experiment(load_splits(config), config.train, exp.n_runs, exp.mode,
                               config.master_seed, config.jobs)


def cmd_correlate(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    exp = config.experiment
    return correlation_table(load_splits(config), config.train, exp.variants, exp.n_runs,
                             config.master_seed, jobs=config.jobs)


def cmd_changes(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    return change_tracking_experiment(load_splits(config), config.train, config.master_seed)


def cmd_uncertainty(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    exp = config.experiment
    return uncertainty_experiment(load_splits(config), config.train, exp.passes,
                                  exp.mc_dropout_rate, config.master_seed)


def cmd_suffix(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    exp = config.experiment
    return suffix_experiment(load_splits(config), config.train, exp.pool_runs, exp.n_checkpoints,
                             exp.b_values, exp.suffix_variant, config.master_seed, config.jobs)


def cmd_manipulate(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    exp = config.experiment
    return manipulate_experiment(load_splits(config), config.train, exp.pool_runs, exp.n_checkpoints,
                                 exp.ratios(), exp.varied_group, config.master_seed, config.jobs)


def cmd_proxy(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    exp = config.experiment
    return proxy_experiment(load_splits(config), config.train, exp.n_runs, exp.stopping_epochs,
                            exp.bins, config.master_seed, config.jobs)


def cmd_blackswan(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    exp = config.experiment
    return black_swan_surface(load_splits(config), config.train, exp.t_max, exp.s_max, exp.repeats,
                              config.master_seed, config.jobs)


def cmd_mitigate(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    exp = config.experiment
    return mitigation_compare(load_splits(config), config.train, exp.n_seeds, exp.setups,
                              exp.post_orders, config.master_seed, config.jobs)


def cmd_metrics(config: RunConfigFile, args: argparse.Namespace) -> ExperimentReport:
    try:
        frame = pd.read_csv(args.predictions, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(f"'{args.predictions}' is empty") from None
    except OSError as e:
        raise DatasetError(f"cannot read '{args.predictions}': {e}") from e
    columns = {}
    for role, name in (("pred", args.pred_column), ("label", args.label_column),
                       ("sensitive", args.sensitive_column)):
        if name not in frame.columns:
            raise MissingColumnError(f"{role} column not found in {args.predictions}", column=name)
        values = frame[name].str.strip()
        bad = ~values.isin(["0", "1"])
        if bad.any():
            row = int(bad.to_numpy().nonzero()[0][0]) + 1
            raise NonBinaryValueError(f"value '{values[bad].iloc[0]}' is not 0/1", row=row, column=name)
        columns[role] = values.astype(int).to_numpy()
    if frame.empty:
        raise EmptyDatasetError(f"'{args.predictions}' has a header but no rows")
    record = evaluate_predictions(columns["pred"], columns["label"], columns["sensitive"])
    row = dict(zip(METRIC_NAMES, record.as_row()[1:]))
    return ExperimentReport("metrics", {"predictions": args.predictions},
                            tables={"metrics": [row]}, summary=row)


COMMANDS: dict[str, Callable[[RunConfigFile, argparse.Namespace], ExperimentReport]] = {
    "generate": cmd_generate,
    "train": cmd_train,
    "decouple": cmd_decouple,
    "correlate": cmd_correlate,
    "changes": cmd_changes,
    "uncertainty": cmd_uncertainty,
    "suffix": cmd_suffix,
    "manipulate": cmd_manipulate,
    "proxy": cmd_proxy,
    "blackswan": cmd_blackswan,
    "mitigate": cmd_mitigate,
    "metrics": cmd_metrics,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logger = setup_logger(level=getattr(logging, args.log_level), log_file=args.log_file,
                          json_format=args.json_logs)
    try:
        config = load_run_config(args.config, args.preset, flag_overrides(args))
        config.check_for(args.command)
        out_dir = Path(config.output_dir)
        logger.info(f"Running '{args.command}' into {out_dir}")
        report = COMMANDS[args.command](config, args)
        path = write_report(report, config, out_dir)
        logger.info(f"Report saved to: {path}")
        return EXIT_OK
    except ValidationError as e:
        for err in e.errors():
            logger.error(f"invalid config: {'.'.join(map(str, err['loc'])) or '<root>'}: {err['msg']}")
        return EXIT_INVALID
    except ConfigError as e:
        for problem in e.problems:
            logger.error(f"invalid config: {problem}")
        return EXIT_INVALID
    except DatasetError as e:
        logger.error(f"invalid data: {e}")
        return EXIT_INVALID
    except Exception:
        logger.exception(f"'{args.command}' failed")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
