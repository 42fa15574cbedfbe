"""CSV ingestion, encoding, imputation, and fold planning.

CSV files are RFC-4180 style, comma-delimited, UTF-8; a header row is
required unless the config supplies column_names. Cell whitespace is
stripped. Missing markers (default "", "?", "NA") are imputed: numeric
columns take the column median, categorical columns the most frequent
value. Categorical features are integer-coded in first-appearance order.
The protected column is binarized to privileged=1 / unprivileged=0 before
training, and the label to {0, 1} via the configured positive value.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DataError
from .tree import Dataset

DEFAULT_MISSING = ("", "?", "NA")


@dataclass(frozen=True)
class RowFilter:
    """Keep/drop rows by raw value, or by numeric bounds (rows whose value
    is missing or unparsable under a numeric bound are dropped)."""

    column: str
    keep_values: Optional[tuple] = None
    drop_values: Optional[tuple] = None
    minimum: Optional[float] = None
    maximum: Optional[float] = None


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    csv_path: str
    label_column: str
    positive_label_value: str
    protected_column: str
    privileged_values: Optional[tuple] = None
    privileged_min: Optional[float] = None
    negative_label_values: Optional[tuple] = None
    drop_columns: tuple = ()
    keep_columns: Optional[tuple] = None
    categorical_columns: Optional[tuple] = None
    one_hot_columns: tuple = ()
    missing_values: tuple = DEFAULT_MISSING
    column_names: Optional[tuple] = None
    row_filters: tuple = ()

    def __post_init__(self):
        if (self.privileged_values is None) == (self.privileged_min is None):
            raise ConfigError(
                "exactly one of privileged_values / privileged_min is required"
            )
        if self.privileged_values is not None and not self.privileged_values:
            raise ConfigError("privileged_values must be non-empty")
        if self.label_column == self.protected_column:
            raise ConfigError("label and protected columns must differ")
        if self.label_column in self.drop_columns or self.protected_column in self.drop_columns:
            raise ConfigError("label and protected columns cannot be dropped")
        if self.keep_columns is not None and self.protected_column not in self.keep_columns:
            raise ConfigError("keep_columns must include the protected column")
        if self.protected_column in self.one_hot_columns:
            raise ConfigError(
                "the protected column stays a single 0/1 feature; it cannot be one-hot"
            )


def load_dataset_config(path) -> DatasetConfig:
    """Read a DatasetConfig from a JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"dataset config not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return dataset_config_from_dict(doc, base=path)


def dataset_config_from_dict(doc: dict, base=None) -> DatasetConfig:
    if not isinstance(doc, dict):
        raise ConfigError("dataset config must be a JSON object")
    required = ("name", "csv_path", "label_column", "positive_label_value",
                "protected_column")
    for key in required:
        if key not in doc:
            raise ConfigError(f"dataset config missing field {key!r}")
    csv_path = doc["csv_path"]
    if base is not None:
        csv_path = os.path.join(os.path.dirname(os.fspath(base)), csv_path)
    filters = []
    for f in doc.get("row_filters", ()):
        filters.append(
            RowFilter(
                column=f["column"],
                keep_values=tuple(f["keep_values"]) if "keep_values" in f else None,
                drop_values=tuple(f["drop_values"]) if "drop_values" in f else None,
                minimum=f.get("min"),
                maximum=f.get("max"),
            )
        )

    def opt_tuple(key):
        return tuple(doc[key]) if doc.get(key) is not None else None

    try:
        return DatasetConfig(
            name=str(doc["name"]),
            csv_path=str(csv_path),
            label_column=str(doc["label_column"]),
            positive_label_value=str(doc["positive_label_value"]),
            protected_column=str(doc["protected_column"]),
            privileged_values=opt_tuple("privileged_values"),
            privileged_min=doc.get("privileged_min"),
            negative_label_values=opt_tuple("negative_label_values"),
            drop_columns=tuple(doc.get("drop_columns", ())),
            keep_columns=opt_tuple("keep_columns"),
            categorical_columns=opt_tuple("categorical_columns"),
            one_hot_columns=tuple(doc.get("one_hot_columns", ())),
            missing_values=tuple(doc.get("missing_values", DEFAULT_MISSING)),
            column_names=opt_tuple("column_names"),
            row_filters=tuple(filters),
        )
    except TypeError as exc:
        raise ConfigError(f"invalid dataset config: {exc}") from exc


def _read_csv(config: DatasetConfig):
    try:
        with open(config.csv_path, "r", encoding="utf-8-sig", newline="") as fh:
            rows = [[cell.strip() for cell in row] for row in csv.reader(fh) if row]
    except FileNotFoundError:
        raise DataError(f"CSV file not found: {config.csv_path}") from None
    if not rows:
        raise DataError(f"{config.csv_path}: empty file")
    if config.column_names is not None:
        header = [name.strip() for name in config.column_names]
    else:
        header = rows[0]
        rows = rows[1:]
    if len(set(header)) != len(header):
        raise DataError("duplicate column names in header")
    if not rows:
        raise DataError(f"{config.csv_path}: no data rows")
    width = len(header)
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(f"row {i}: expected {width} cells, found {len(row)}")
    return header, rows


def _column(header, rows, name):
    try:
        j = header.index(name)
    except ValueError:
        raise DataError(f"missing column {name!r}") from None
    return [row[j] for row in rows]


def _is_missing(value, config):
    return value in config.missing_values


def _parse_float(value):
    try:
        return float(value)
    except ValueError:
        return None


def _apply_filters(header, rows, config: DatasetConfig):
    for f in config.row_filters:
        col = _column(header, rows, f.column)
        keep = []
        for i, value in enumerate(col):
            ok = True
            if f.keep_values is not None:
                ok = ok and value in f.keep_values
            if f.drop_values is not None:
                ok = ok and value not in f.drop_values
            if f.minimum is not None or f.maximum is not None:
                num = None if _is_missing(value, config) else _parse_float(value)
                if num is None:
                    ok = False
                else:
                    if f.minimum is not None:
                        ok = ok and num >= f.minimum
                    if f.maximum is not None:
                        ok = ok and num <= f.maximum
            keep.append(ok)
        rows = [row for row, ok in zip(rows, keep) if ok]
    if not rows:
        raise DataError("row filters removed every row")
    return rows


def _encode_labels(raw, config: DatasetConfig):
    labels = np.empty(len(raw), dtype=np.int64)
    for i, value in enumerate(raw, start=1):
        if _is_missing(value, config):
            raise DataError(f"row {i}: missing label value")
        if value == config.positive_label_value:
            labels[i - 1] = 1
        elif (
            config.negative_label_values is None
            or value in config.negative_label_values
        ):
            labels[i - 1] = 0
        else:
            raise DataError(f"row {i}: label value {value!r} not in label mapping")
    return labels


def _mode(values):
    """Most frequent element; ties break toward earliest first appearance."""
    counts, first = {}, {}
    for i, v in enumerate(values):
        if v not in counts:
            first[v] = i
        counts[v] = counts.get(v, 0) + 1
    return max(counts, key=lambda v: (counts[v], -first[v]))


def _encode_protected(raw, config: DatasetConfig):
    present = [v for v in raw if not _is_missing(v, config)]
    if not present:
        raise DataError(f"column {config.protected_column!r} has no values")
    if config.privileged_values is not None:
        fill = _mode(present)
        column = np.array(
            [
                1.0 if (fill if _is_missing(v, config) else v) in config.privileged_values else 0.0
                for v in raw
            ]
        )
        kind = {}
        for v in present:
            kind.setdefault(v, 1 if v in config.privileged_values else 0)
        return column, kind
    numbers = [_parse_float(v) for v in present]
    if any(n is None for n in numbers):
        raise DataError(
            f"column {config.protected_column!r}: privileged_min requires numeric values"
        )
    median = float(np.median(numbers))
    out = np.empty(len(raw))
    for i, v in enumerate(raw):
        num = median if _is_missing(v, config) else _parse_float(v)
        if num is None:
            raise DataError(f"row {i + 1}: non-numeric value {v!r} in "
                            f"{config.protected_column!r}")
        out[i] = 1.0 if num >= config.privileged_min else 0.0
    return out, "numeric"


def _encode_feature(name, raw, config: DatasetConfig):
    """(values, kind) for one non-protected feature column."""
    present = [v for v in raw if not _is_missing(v, config)]
    if not present:
        raise DataError(f"column {name!r} has no values")
    if config.categorical_columns is not None:
        categorical = name in config.categorical_columns
    else:
        categorical = any(_parse_float(v) is None for v in present)
    if categorical:
        codes = {}
        for v in present:  # first-appearance order
            if v not in codes:
                codes[v] = len(codes)
        fill = codes[_mode(present)]
        values = np.array(
            [fill if _is_missing(v, config) else codes[v] for v in raw],
            dtype=np.float64,
        )
        return values, codes
    numbers = []
    for i, v in enumerate(raw, start=1):
        if _is_missing(v, config):
            numbers.append(None)
            continue
        num = _parse_float(v)
        if num is None:
            raise DataError(f"row {i}: non-numeric value {v!r} in numeric column {name!r}")
        numbers.append(num)
    median = float(np.median([n for n in numbers if n is not None]))
    return np.array([median if n is None else n for n in numbers]), "numeric"


def _one_hot(name, raw, config: DatasetConfig):
    """One 0/1 indicator column per distinct value, first-appearance order;
    missing entries count as the column mode."""
    present = [v for v in raw if not _is_missing(v, config)]
    if not present:
        raise DataError(f"column {name!r} has no values")
    fill = _mode(present)
    filled = [fill if _is_missing(v, config) else v for v in raw]
    values = []
    for v in filled:
        if v not in values:
            values.append(v)
    return [
        (f"{name}={v}", np.array([1.0 if x == v else 0.0 for x in filled]))
        for v in values
    ]


def load_dataset(config: DatasetConfig) -> Dataset:
    """Ingest the configured CSV into a fully numeric Dataset.

    Deterministic: identical file and config produce an identical Dataset."""
    header, rows = _read_csv(config)
    for name in (config.label_column, config.protected_column, *config.drop_columns):
        _column(header, rows, name)  # existence check with a clear error
    rows = _apply_filters(header, rows, config)
    labels = _encode_labels(_column(header, rows, config.label_column), config)
    feature_names, feature_kinds, columns = [], [], []
    for name in header:
        if name == config.label_column or name in config.drop_columns:
            continue
        if config.keep_columns is not None and name not in config.keep_columns:
            continue
        raw = _column(header, rows, name)
        if name == config.protected_column:
            values, kind = _encode_protected(raw, config)
        elif name in config.one_hot_columns:
            for dummy_name, values in _one_hot(name, raw, config):
                feature_names.append(dummy_name)
                feature_kinds.append("numeric")
                columns.append(values)
            continue
        else:
            values, kind = _encode_feature(name, raw, config)
        feature_names.append(name)
        feature_kinds.append(kind)
        columns.append(values)
    return Dataset(
        feature_names=feature_names,
        feature_kinds=feature_kinds,
        rows=np.column_stack(columns),
        labels=labels,
    )


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    assignments: np.ndarray = field(compare=False)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.assignments == fold)[0]

    def train_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.assignments != fold)[0]


def make_folds(n_rows: int, k: int, seed: int, labels=None) -> FoldPlan:
    """Seeded shuffle then round-robin assignment; fold sizes differ by at
    most one. Pass labels for class-stratified assignment."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n_rows:
        raise ValueError(f"k ({k}) exceeds n_rows ({n_rows})")
    perm = np.random.default_rng(seed).permutation(n_rows)
    assignments = np.empty(n_rows, dtype=np.int64)
    if labels is None:
        assignments[perm] = np.arange(n_rows) % k
    else:
        labels = np.asarray(labels)
        counter = 0
        for cls in (0, 1):
            members = perm[labels[perm] == cls]
            assignments[members] = (np.arange(len(members)) + counter) % k
            counter += len(members)
    return FoldPlan(k=k, seed=seed, assignments=assignments)
