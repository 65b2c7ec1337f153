"""
    reportdump.py
    ~~~~~~~~~~~~~~~~~~~~~~
    This module converts experiment reports into plain, JSON-safe structures and writes
    every output file (report JSON, trajectory and table CSVs) atomically, so identical
    inputs always give byte-identical files.
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

import csv
import io
import json
import math
import os
import tempfile
from collections.abc import Mapping
from dataclasses import fields, is_dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


# --- helpers to make everything JSON-safe ---
def _to_json_safe(x: Any):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        x = float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Path):
        return str(x)
    return x


def dump_plain(obj: Any) -> Any:
    """
    Recursively convert dataclasses, pydantic models, numpy values and containers into
    dicts, lists and primitives. NaN and infinities become None; mapping keys become
    strings (tuples are joined with '_').
    """
    if obj is None or isinstance(obj, (str, bool, int)):
        return obj
    if isinstance(obj, (float, np.generic, Path)):
        return _to_json_safe(obj)
    if isinstance(obj, np.ndarray):
        return [dump_plain(v) for v in obj.tolist()]

    # Pydantic (v2) models
    if hasattr(obj, "model_dump") and callable(obj.model_dump):
        return dump_plain(obj.model_dump(mode="python"))

    # Dataclasses; shallow so numpy fields are not deep-copied
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: dump_plain(getattr(obj, f.name)) for f in fields(obj)
                if not f.name.startswith("_")}

    if isinstance(obj, Mapping):
        out = {}
        for k, v in obj.items():
            if isinstance(k, tuple):
                k = "_".join(str(part) for part in k)
            out[str(k)] = dump_plain(v)
        return out

    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [dump_plain(v) for v in items]

    for attr in ("to_dict", "dict"):
        if hasattr(obj, attr) and callable(getattr(obj, attr)):
            return dump_plain(getattr(obj, attr)())

    return _to_json_safe(obj)


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write to a temp file next to `path`, then rename over it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def write_json(path: str | Path, obj: Any) -> Path:
    text = json.dumps(dump_plain(obj), ensure_ascii=False, indent=2, sort_keys=True, allow_nan=False)
    return atomic_write_text(path, text + "\n")


def format_cell(value: Any, decimals: int = 6) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return f"{value:.{decimals}f}"
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]],
              decimals: int = 6) -> Path:
    """Comma-separated, '\\n' line endings, reals with a fixed number of decimals.

    Cells holding commas, quotes or newlines are quoted.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} cells for {len(header)} columns")
        writer.writerow([format_cell(v, decimals) for v in row])
    return atomic_write_text(path, buffer.getvalue())


def write_table(path: str | Path, records: Sequence[Mapping[str, Any]], decimals: int = 6) -> Path:
    """Long-format table: header is the key order of the first record."""
    if not records:
        return write_csv(path, [], [], decimals)
    header = list(records[0].keys())
    return write_csv(path, header, ([r.get(k) for k in header] for r in records), decimals)
