import json
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
import pytest

from models.common import TrainConfig
from util.reportdump import atomic_write_text, dump_plain, format_cell, write_csv, write_json, write_table


@dataclass
class Row:
    name: str
    values: np.ndarray


class TestDumpPlain:
    def test_non_finite_becomes_none(self):
        assert dump_plain({"a": math.nan, "b": np.float64(np.inf), "c": 1.5}) == {"a": None, "b": None, "c": 1.5}

    def test_tuple_keys_are_joined(self):
        assert dump_plain({(0, 1): 2.0}) == {"0_1": 2.0}

    def test_numpy_and_dataclasses(self):
        out = dump_plain(Row("x", np.array([1, 2], dtype=np.int64)))
        assert out == {"name": "x", "values": [1, 2]}
        assert isinstance(dump_plain(np.int64(3)), int)

    def test_pydantic_models(self):
        out = dump_plain(TrainConfig(hidden_sizes=(4, 2), epochs=5, record_window=(1, 5)))
        assert out["hidden_sizes"] == [4, 2]
        assert out["record_window"] == [1, 5]


class TestFormatting:
    @pytest.mark.parametrize("value,text", [
        (None, ""), (True, "true"), (3, "3"), (np.int64(4), "4"),
        (2.0 / 3.0, "0.666667"), (math.nan, "nan"), (-0.5, "-0.500000"), ("a0y1", "a0y1"),
    ])
    def test_cells(self, value, text):
        assert format_cell(value) == text

    def test_csv_layout(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", ["epoch", "f1"], [[1, 50.0], [2, math.nan]])
        assert path.read_bytes() == b"epoch,f1\n1,50.000000\n2,nan\n"

    def test_row_width_checked(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "t.csv", ["a", "b"], [[1]])

    def test_table_header_from_first_record(self, tmp_path):
        path = write_table(tmp_path / "t.csv", [{"b": 1, "metric": "f1"}, {"metric": "dp", "b": None}])
        assert path.read_text(encoding="utf-8") == "b,metric\n1,f1\n,dp\n"

    def test_cells_with_commas_and_quotes_survive_reading_back(self, tmp_path):
        path = write_table(tmp_path / "t.csv", [{"variant": "lr,0.01", "gap": 0.5},
                                                 {"variant": 'say "hi"', "gap": 1.0}])
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["variant", "gap"]
        assert frame["variant"].tolist() == ["lr,0.01", 'say "hi"']
        assert frame["gap"].tolist() == [0.5, 1.0]


class TestAtomicWrites:
    def test_creates_parents_and_replaces(self, tmp_path):
        target = tmp_path / "deep" / "out.txt"
        atomic_write_text(target, "first")
        atomic_write_text(target, "second")
        assert target.read_text(encoding="utf-8") == "second"
        assert [p.name for p in target.parent.iterdir()] == ["out.txt"]

    def test_json_is_strict_and_sorted(self, tmp_path):
        path = write_json(tmp_path / "r.json", {"b": math.nan, "a": 1})
        text = path.read_text(encoding="utf-8")
        assert json.loads(text) == {"a": 1, "b": None}
        assert text.index('"a"') < text.index('"b"')
