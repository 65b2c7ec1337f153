import json

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from experiment import TRAJECTORY_HEADER, build_parser, flag_overrides, load_splits, main
from models.runconfig import load_run_config
from util.errors import ConfigError

TINY = {
    "dataset": {"source": "synthetic", "synthetic": {"n": 400, "dims": 4, "seed": 3}},
    "train": {"hidden_sizes": [8], "learning_rate": 0.05, "batch_size": 16, "epochs": 4,
              "record_window": [2, 4]},
    "experiment": {"n_runs": 2, "pool_runs": 1, "n_checkpoints": 2, "b_values": [0, 1],
                   "t_max": 2, "s_max": 2, "repeats": 1, "n_seeds": 3, "passes": 5},
}


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(TINY), encoding="utf-8")
    return path


def run(command: str, config, out, *flags: str) -> int:
    return main([command, "--config", str(config), "--out", str(out), "--log-level", "WARNING", *flags])


def read_report(out) -> dict:
    return json.loads((out / "report.json").read_text(encoding="utf-8"))


class TestTrain:
    def test_rerun_is_byte_identical(self, tiny_config, tmp_path):
        assert run("train", tiny_config, tmp_path / "a") == 0
        assert run("train", tiny_config, tmp_path / "b") == 0
        for name in ("trajectory_run000.csv", "trajectory_run000_val.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_trajectory_layout(self, tiny_config, tmp_path):
        assert run("train", tiny_config, tmp_path) == 0
        lines = (tmp_path / "trajectory_run000.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(TRAJECTORY_HEADER)
        assert lines[0] == "epoch,f1,avg_odds,eopp,dp,acc,acc_a0y1,acc_a0y0,acc_a1y1,acc_a1y0"
        assert [line.split(",")[0] for line in lines[1:]] == ["1", "2", "3", "4"]
        assert all(len(cell.split(".")[1]) == 6 for cell in lines[1].split(",")[1:] if cell != "nan")

    def test_report_echoes_config(self, tiny_config, tmp_path):
        assert run("train", tiny_config, tmp_path, "--weight-seed", "9", "--shuffle-seed", "4") == 0
        report = read_report(tmp_path)
        assert report["experiment"] == "train"
        assert report["run_config"]["train"]["learning_rate"] == 0.05
        assert report["run_config"]["train"]["weight_seed"] == 9
        assert report["seeds"] == [{"run_id": "run000", "weight_seed": 9, "shuffle_seed": 4}]
        assert report["trajectory_files"] == ["trajectory_run000.csv", "trajectory_run000_val.csv"]


class TestDecouple:
    def test_frozen_fixed_weight_init_runs_match(self, tiny_config, tmp_path):
        code = run("decouple", tiny_config, tmp_path, "--mode", "fixed_weight_init", "--runs", "2", "--lr", "0")
        assert code == 0
        first = (tmp_path / "trajectory_run000.csv").read_bytes()
        second = (tmp_path / "trajectory_run001.csv").read_bytes()
        assert first.split(b"\n")[1:] == second.split(b"\n")[1:]

    def test_frozen_fixed_reshuffle_runs_are_flat(self, tiny_config, tmp_path):
        code = run("decouple", tiny_config, tmp_path, "--mode", "fixed_reshuffle", "--runs", "2", "--lr", "0")
        assert code == 0
        for run_id in ("run000", "run001"):
            frame = pd.read_csv(tmp_path / f"trajectory_{run_id}.csv")
            assert (frame.drop(columns="epoch").nunique(dropna=False) == 1).all()
        report = read_report(tmp_path)
        assert report["summary"]["mean_pairwise_pearson"]["f1"] is None
        assert {"finals", "bands", "var_epochs"} <= set(report["table_files"])


class TestMetricsCommand:
    def test_perfect_predictions(self, tmp_path):
        preds = tmp_path / "preds.csv"
        preds.write_text("pred,y,a\n1,1,0\n0,0,0\n1,1,1\n0,0,1\n", encoding="utf-8")
        out = tmp_path / "out"
        assert main(["metrics", "--predictions", str(preds), "--out", str(out), "--log-level", "ERROR"]) == 0
        summary = read_report(out)["summary"]
        assert summary["f1"] == 100.0
        assert summary["avg_odds"] == 0.0
        assert summary["acc"] == 100.0

    def test_non_binary_prediction(self, tmp_path):
        preds = tmp_path / "preds.csv"
        preds.write_text("pred,y,a\n1,1,0\n2,0,0\n", encoding="utf-8")
        assert main(["metrics", "--predictions", str(preds), "--out", str(tmp_path),
                     "--log-level", "ERROR"]) == 1

    def test_missing_column(self, tmp_path):
        preds = tmp_path / "preds.csv"
        preds.write_text("p,y,a\n1,1,0\n", encoding="utf-8")
        assert main(["metrics", "--predictions", str(preds), "--out", str(tmp_path),
                     "--log-level", "ERROR"]) == 1

    @pytest.mark.parametrize("content", ["", "pred,y,a\n"])
    def test_empty_predictions_are_invalid_data(self, tmp_path, content):
        preds = tmp_path / "preds.csv"
        preds.write_text(content, encoding="utf-8")
        assert main(["metrics", "--predictions", str(preds), "--out", str(tmp_path / "out"),
                     "--log-level", "ERROR"]) == 1

    def test_unreadable_predictions_are_invalid_data(self, tmp_path):
        assert main(["metrics", "--predictions", str(tmp_path / "absent.csv"), "--out", str(tmp_path),
                     "--log-level", "ERROR"]) == 1


class TestConfiguration:
    def test_every_field_problem_is_reported(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"train": {"learning_rate": -1, "batch_size": 0}, "jobs": 0}), encoding="utf-8")
        with pytest.raises(ValidationError) as info:
            load_run_config(bad)
        locations = {err["loc"] for err in info.value.errors()}
        assert {("train", "learning_rate"), ("train", "batch_size"), ("jobs",)} <= locations
        assert run("train", bad, tmp_path) == 1

    def test_cross_field_problems_reported_with_field_errors(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"dataset": {"synthetic": {"n": 100}},
                                   "train": {"learning_rate": -1, "batch_size": 500}}), encoding="utf-8")
        with pytest.raises(ValidationError) as info:
            load_run_config(bad)
        errors = info.value.errors()
        assert ("train", "learning_rate") in {err["loc"] for err in errors}
        assert any("batch_size 500 exceeds the 70 training rows" in err["msg"] for err in errors)
        assert run("train", bad, tmp_path) == 1

    def test_variant_blamed_only_for_its_own_keys(self):
        with pytest.raises(ValidationError) as info:
            load_run_config(overrides={"train": {"learning_rate": -1},
                                       "experiment": {"variants": {"wide": {"hidden_sizes": [0]}}}})
        messages = [err["msg"] for err in info.value.errors()]
        assert any("experiment.variants.wide.hidden_sizes" in m for m in messages)
        assert not any("experiment.variants.wide.learning_rate" in m for m in messages)

    def test_valid_config_has_no_cross_field_problems(self):
        assert load_run_config(preset="desk").train.learning_rate == 0.05

    def test_unknown_key(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"trian": {}}), encoding="utf-8")
        assert run("train", bad, tmp_path) == 1

    def test_broken_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_run_config(bad)

    def test_command_preconditions_listed_together(self, tiny_config):
        config = load_run_config(tiny_config, overrides={"experiment": {"n_checkpoints": 100, "b_values": [1000]}})
        with pytest.raises(ConfigError) as info:
            config.check_for("suffix")
        assert len(info.value.problems) == 2

    def test_blackswan_t_max_beyond_epochs(self, tiny_config, tmp_path):
        assert run("blackswan", tiny_config, tmp_path, "--t-max", "5") == 1

    def test_precedence(self, tiny_config):
        config = load_run_config(tiny_config, "desk", {"train": {"learning_rate": 0.2}})
        assert config.train.learning_rate == 0.2     # flag beats file
        assert config.train.epochs == 4               # file beats preset
        assert config.experiment.repeats == 1
        assert config.experiment.passes == 5
        preset_only = load_run_config(None, "desk")
        assert preset_only.train.epochs == 150
        assert preset_only.experiment.n_runs == 10

    def test_flags_become_nested_overrides(self):
        args = build_parser().parse_args(["suffix", "--window", "3", "9", "--seed", "7", "--b-values", "0", "2"])
        assert flag_overrides(args) == {"train": {"record_window": [3, 9]}, "master_seed": 7,
                                        "experiment": {"b_values": [0, 2]}}

    def test_generate_writes_dataset(self, tiny_config, tmp_path):
        assert run("generate", tiny_config, tmp_path) == 0
        frame = pd.read_csv(tmp_path / "dataset.csv")
        assert len(frame) == 400
        assert {"y", "a"} <= set(frame.columns)
        assert read_report(tmp_path)["summary"]["rows"] == 400


class TestLoadSplits:
    def test_sensitive_attribute_withheld_by_default(self):
        splits = load_splits(load_run_config(overrides=TINY))
        assert splits.train.dim == 4
        assert sum(part.n for part in splits) == 400

    def test_presets_feed_the_sensitive_attribute(self):
        for preset in ("full", "desk"):
            assert load_run_config(preset=preset).dataset.sensitive_as_feature
        config = load_run_config(preset="desk", overrides=TINY)
        splits = load_splits(config)
        assert splits.train.dim == 5
        assert splits.train.columns[-1] == "a"
        assert np.array_equal(splits.train.features[:, -1], splits.train.sensitive)


class TestDeterminism:
    @pytest.mark.parametrize("command,flags", [
        ("train", []),
        ("decouple", ["--runs", "3"]),
        ("proxy", ["--runs", "6", "--epochs", "8", "--window", "2", "8"]),
        ("mitigate", []),
    ])
    def test_rerun_in_another_directory_is_byte_identical(self, tiny_config, tmp_path, monkeypatch,
                                                         command, flags):
        outputs = []
        for name in ("first", "second"):
            workdir = tmp_path / name
            workdir.mkdir()
            monkeypatch.chdir(workdir)
            assert main([command, "--config", str(tiny_config), "--out", "results",
                         "--log-level", "WARNING", *flags]) == 0
            outputs.append({p.relative_to(workdir): p.read_bytes() for p in sorted(workdir.rglob("*"))
                            if p.is_file()})
        assert "report.json" in {p.name for p in outputs[0]}
        assert outputs[0] == outputs[1]
