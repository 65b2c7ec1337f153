# -*- coding: utf-8 -*-
"""
data/dataset.py
Tabular binary-classification data with a binary sensitive attribute: CSV ingestion and
export, the synthetic generator, the fixed train/val/test split and reweighing weights.

date: 2026-10-18
"""
__version__ = "0.1.0"
__date__ = "2026-10-18"
__author__ = ["fairorder developers"]
__copyright__ = "Copyright 2026, fairorder developers"
__license__ = "MIT"

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
import pandas as pd

from models.common import SUBGROUPS, SynthSpec
from util.errors import (
    DatasetError,
    EmptyDatasetError,
    MissingColumnError,
    NonBinaryValueError,
    NonNumericCellError,
    SplitError,
)
from util.logger import get_logger
from util.prng import DATA_STREAM, SPLIT_STREAM, gaussians, prng_from, shuffle
from util.reportdump import atomic_write_text

logger = get_logger("data")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Rows of (x, y, a). Immutable after construction; subsets copy."""
    features: np.ndarray  # n x d float64
    labels: np.ndarray    # n of {0, 1}
    sensitive: np.ndarray  # n of {0, 1}
    columns: tuple[str, ...]

    def __post_init__(self):
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        sensitive = np.asarray(self.sensitive, dtype=np.int64)
        if features.ndim != 2 or features.shape[0] == 0:
            raise EmptyDatasetError("dataset has no rows")
        n, d = features.shape
        if labels.shape != (n,) or sensitive.shape != (n,):
            raise DatasetError(f"{n} feature rows but {labels.shape[0]} labels and "
                               f"{sensitive.shape[0]} sensitive values")
        if len(self.columns) != d:
            raise DatasetError(f"{d} feature columns but {len(self.columns)} names")
        if not np.all(np.isfinite(features)):
            row = int(np.flatnonzero(~np.all(np.isfinite(features), axis=1))[0])
            raise NonNumericCellError("non-finite feature value", row=row)
        for name, values in (("label", labels), ("sensitive", sensitive)):
            bad = np.flatnonzero((values != 0) & (values != 1))
            if bad.size:
                raise NonBinaryValueError(f"{name} value {values[bad[0]]} is not 0/1", row=int(bad[0]))
        for attr, value in (("features", features), ("labels", labels), ("sensitive", sensitive)):
            value.setflags(write=False)
            object.__setattr__(self, attr, value)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: Sequence[int] | np.ndarray) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.sensitive[idx], self.columns)

    def subgroup_codes(self) -> np.ndarray:
        """Index into SUBGROUPS for every row."""
        codes = np.empty(self.n, dtype=np.int64)
        for code, (a, y) in enumerate(SUBGROUPS):
            codes[(self.sensitive == a) & (self.labels == y)] = code
        return codes

    def subgroup_counts(self) -> np.ndarray:
        return np.bincount(self.subgroup_codes(), minlength=len(SUBGROUPS))


def largest_remainder(total: int, proportions: Sequence[float]) -> np.ndarray:
    """
    Integer counts summing to `total`, proportional to `proportions`.

    Floors first, then one extra unit each to the largest fractional parts; ties go to
    the earlier index.
    """
    props = np.asarray(proportions, dtype=np.float64)
    if props.ndim != 1 or np.any(props < 0) or props.sum() <= 0:
        raise ValueError(f"invalid proportions {list(props)}")
    raw = np.round(total * props / props.sum(), 9)
    counts = np.floor(raw).astype(np.int64)
    remainder = total - int(counts.sum())
    if remainder > 0:
        fractions = raw - counts
        ranked = sorted(range(props.size), key=lambda k: (-fractions[k], k))
        for k in ranked[:remainder]:
            counts[k] += 1
    return counts


def minority_positive_group(dataset: Dataset) -> int:
    """Sensitive value whose positive subgroup is the least represented (ties -> 0)."""
    counts = dataset.subgroup_counts()
    positives = {a: counts[SUBGROUPS.index((a, 1))] for a in (0, 1)}
    return 0 if positives[0] <= positives[1] else 1


def with_sensitive_feature(dataset: Dataset, name: str = "a") -> Dataset:
    """Append the sensitive attribute as the last input column."""
    if name in dataset.columns:
        raise DatasetError(f"feature column '{name}' already exists")
    features = np.hstack([dataset.features, dataset.sensitive[:, None].astype(np.float64)])
    return Dataset(features, dataset.labels, dataset.sensitive, (*dataset.columns, name))


def _binary_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    values = np.empty(len(frame), dtype=np.int64)
    for row, cell in enumerate(frame[column].tolist()):
        text = str(cell).strip()
        try:
            number = float(text)
        except ValueError:
            raise NonBinaryValueError(f"value '{text}' is not 0/1", row=row + 1, column=column) from None
        if number not in (0.0, 1.0):
            raise NonBinaryValueError(f"value '{text}' is not 0/1", row=row + 1, column=column)
        values[row] = int(number)
    return values


def load_csv(path: str | Path, label_column: str, sensitive_column: str) -> Dataset:
    """
    Read a comma-separated, UTF-8, header-first file.

    Every column other than the label and sensitive ones becomes a feature, in file
    order. Rows are numbered from 1 (first data row) in error messages.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(f"'{path}' is empty") from None
    except OSError as e:
        raise DatasetError(f"cannot read '{path}': {e}") from e
    for column in (label_column, sensitive_column):
        if column not in frame.columns:
            raise MissingColumnError(f"'{path}' has no such column; found {list(frame.columns)}",
                                     column=column)
    if frame.empty:
        raise EmptyDatasetError(f"'{path}' has a header but no rows")
    feature_columns = [c for c in frame.columns if c not in (label_column, sensitive_column)]
    numeric = frame[feature_columns].apply(pd.to_numeric, errors="coerce")
    invalid = numeric.isna().to_numpy()
    if invalid.any():
        row, col = (int(v) for v in np.argwhere(invalid)[0])
        cell = frame[feature_columns[col]].iloc[row]
        raise NonNumericCellError(f"cannot parse '{cell}' as a real number", row=row + 1,
                                  column=feature_columns[col])
    dataset = Dataset(
        features=numeric.to_numpy(dtype=np.float64),
        labels=_binary_column(frame, label_column),
        sensitive=_binary_column(frame, sensitive_column),
        columns=tuple(feature_columns),
    )
    logger.info(f"Loaded {dataset.n} rows x {dataset.dim} features from {path}")
    return dataset


def save_csv(dataset: Dataset, path: str | Path, label_column: str = "y",
             sensitive_column: str = "a") -> Path:
    """Write `dataset` in the format load_csv reads back (features, sensitive, label)."""
    frame = pd.DataFrame(dataset.features, columns=list(dataset.columns))
    frame[sensitive_column] = dataset.sensitive
    frame[label_column] = dataset.labels
    path = Path(path)
    atomic_write_text(path, frame.to_csv(index=False, float_format="%.17g", lineterminator="\n"))
    return path


def synth_generate(spec: SynthSpec) -> Dataset:
    """
    Four Gaussian blobs, one per (a, y) subgroup.

    Subgroup sizes are the largest-remainder apportionment of n * proportions. A row of
    subgroup (a, y) is delta*y on the first axis plus epsilon*a on the second, plus
    sigma * N(0, I). Rows are generated subgroup by subgroup, then shuffled together.
    """
    counts = largest_remainder(spec.n, spec.proportions)
    stream = prng_from(spec.seed, DATA_STREAM)
    blocks, labels, sensitive = [], [], []
    for (a, y), count in zip(SUBGROUPS, counts):
        noise, stream = gaussians(stream, int(count) * spec.dims)
        block = spec.sigma * noise.reshape(int(count), spec.dims)
        block[:, 0] += spec.delta * y
        block[:, 1] += spec.epsilon * a
        blocks.append(block)
        labels.append(np.full(count, y))
        sensitive.append(np.full(count, a))
    order, _ = shuffle(np.arange(spec.n), stream)
    return Dataset(
        features=np.vstack(blocks)[order],
        labels=np.concatenate(labels)[order],
        sensitive=np.concatenate(sensitive)[order],
        columns=tuple(f"x{k}" for k in range(spec.dims)),
    )


class Splits(NamedTuple):
    train: Dataset
    val: Dataset
    test: Dataset


def split(dataset: Dataset, ratios: Sequence[float] = (0.7, 0.1, 0.2), seed: int = 0) -> Splits:
    """One shuffle of all rows, then contiguous train/val/test cuts."""
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"split ratios must be three positive reals summing to 1, got {list(ratios)}")
    sizes = largest_remainder(dataset.n, ratios)
    if np.any(sizes == 0):
        raise SplitError(f"{dataset.n} rows give an empty part with ratios {list(ratios)}: "
                         f"sizes {sizes.tolist()}")
    perm, _ = shuffle(np.arange(dataset.n), prng_from(seed, SPLIT_STREAM))
    cut1, cut2 = int(sizes[0]), int(sizes[0] + sizes[1])
    return Splits(dataset.subset(perm[:cut1]), dataset.subset(perm[cut1:cut2]),
                  dataset.subset(perm[cut2:]))


def reweighing_weights(train: Dataset) -> np.ndarray:
    """w(a, y) = N_a * N_y / (N * N_ay), one weight per row."""
    total = train.n
    weights = np.empty(total, dtype=np.float64)
    for a, y in SUBGROUPS:
        rows = (train.sensitive == a) & (train.labels == y)
        n_ay = int(rows.sum())
        if n_ay == 0:
            raise DatasetError(f"subgroup (a={a}, y={y}) is empty; reweighing is undefined")
        n_a = int((train.sensitive == a).sum())
        n_y = int((train.labels == y).sum())
        weights[rows] = (n_a * n_y) / (total * n_ay)
    return weights
