"""Tabular numeric data: CSV loading, YoY transforms and standardization.

Missing cells are NaN in :attr:`Dataset.values`. A column whose header is
exactly ``period`` is read as row labels rather than data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

LABEL_COLUMN = "period"
MISSING_TOKENS = ("NA", "")


class DatasetError(ValueError):
    """Base class for dataset construction and transform failures."""


class MissingResponseColumn(DatasetError):
    pass


class UnparseableCell(DatasetError):
    def __init__(self, row: int, col: str, text: str):
        super().__init__(f"cannot parse {text!r} at data row {row}, column {col!r}")
        self.row = row
        self.col = col


class MissingInResponse(DatasetError):
    pass


class DuplicateColumnName(DatasetError):
    pass


class DegenerateDataset(DatasetError):
    pass


class TooShort(DatasetError):
    pass


class DivisionByZero(DatasetError):
    def __init__(self, position: int):
        super().__init__(f"zero denominator at position {position}")
        self.position = position


class ZeroVariance(DatasetError):
    def __init__(self, column: str):
        super().__init__(f"column {column!r} has zero variance")
        self.column = column


@dataclass(frozen=True)
class ColumnStats:
    mean: float
    std_dev: float
    min: float
    max: float
    missing_count: int


@dataclass(frozen=True)
class Dataset:
    """Named numeric columns with one designated response.

    ``values`` is ``(n_rows, n_cols)`` float64; NaN marks a missing cell.
    The array is made read-only on construction.
    """

    column_names: tuple
    values: np.ndarray
    response_index: int
    row_labels: Optional[tuple] = None

    def __post_init__(self):
        names = tuple(self.column_names)
        object.__setattr__(self, "column_names", names)
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.ndim != 2 or vals.shape[1] != len(names):
            raise DatasetError(f"values shape {vals.shape} does not match {len(names)} columns")
        if any(not n for n in names):
            raise DatasetError("column names must be non-empty")
        seen = set()
        for n in names:
            if n in seen:
                raise DuplicateColumnName(f"duplicate column name {n!r}")
            seen.add(n)
        if not 0 <= self.response_index < len(names):
            raise DatasetError(f"response_index {self.response_index} out of range")
        if vals.shape[0] < 2:
            raise DegenerateDataset(f"need at least 2 rows, got {vals.shape[0]}")
        if np.isnan(vals[:, self.response_index]).any():
            raise MissingInResponse(f"response column {names[self.response_index]!r} has missing values")
        if self.row_labels is not None:
            labels = tuple(self.row_labels)
            if len(labels) != vals.shape[0]:
                raise DatasetError("row_labels length does not match number of rows")
            object.__setattr__(self, "row_labels", labels)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_arrays(cls, X, y, feature_names=None, response_name="y", row_labels=None):
        """Build a dataset from a predictor matrix and a response vector (response last)."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if feature_names is None:
            feature_names = [f"x{j + 1}" for j in range(X.shape[1])]
        values = np.column_stack([X, np.asarray(y, dtype=np.float64)])
        return cls(tuple(feature_names) + (response_name,), values, X.shape[1], row_labels)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def response_name(self) -> str:
        return self.column_names[self.response_index]

    @property
    def predictor_indices(self) -> list:
        return [j for j in range(len(self.column_names)) if j != self.response_index]

    @property
    def predictor_names(self) -> list:
        return [self.column_names[j] for j in self.predictor_indices]

    @property
    def X(self) -> np.ndarray:
        return self.values[:, self.predictor_indices]

    @property
    def y(self) -> np.ndarray:
        return self.values[:, self.response_index]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_names.index(name)]

    def stats(self, name: str) -> ColumnStats:
        return column_stats(self.column(name))

    def select(self, predictors: Sequence[str]) -> "Dataset":
        """Keep only ``predictors`` (in the given order) plus the response."""
        unknown = [p for p in predictors if p not in self.predictor_names]
        if unknown:
            raise DatasetError(f"unknown predictors {unknown}")
        cols = [self.column_names.index(p) for p in predictors] + [self.response_index]
        return Dataset(
            tuple(self.column_names[c] for c in cols),
            self.values[:, cols],
            len(predictors),
            self.row_labels,
        )

    def replace_values(self, values) -> "Dataset":
        return Dataset(self.column_names, values, self.response_index, self.row_labels)


def column_stats(col) -> ColumnStats:
    col = np.asarray(col, dtype=np.float64)
    ok = col[~np.isnan(col)]
    if ok.shape[0] == 0:
        return ColumnStats(math.nan, math.nan, math.nan, math.nan, int(col.shape[0]))
    std = float(np.std(ok, ddof=1)) if ok.shape[0] > 1 else 0.0
    return ColumnStats(float(ok.mean()), std, float(ok.min()), float(ok.max()),
                       int(col.shape[0] - ok.shape[0]))


def _parse_cell(text: str, row: int, col: str) -> float:
    if text in MISSING_TOKENS:
        return math.nan
    try:
        v = float(text)
    except ValueError:
        raise UnparseableCell(row, col, text) from None
    if math.isnan(v):
        # "nan" is not a recognised missing marker
        raise UnparseableCell(row, col, text)
    return v


def load_csv(path, response: str, label_column: str = LABEL_COLUMN) -> Dataset:
    """Read a comma-separated file with a header row into a :class:`Dataset`.

    Cells equal to ``NA`` or empty are missing. If a column is named
    ``label_column`` its cells become ``row_labels`` verbatim.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DegenerateDataset(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    seen = set()
    for h in header:
        if h in seen:
            raise DuplicateColumnName(f"duplicate column name {h!r}")
        seen.add(h)
    if response not in header:
        raise MissingResponseColumn(f"response column {response!r} not in header {header}")

    label_idx = header.index(label_column) if label_column in header else None
    data_cols = [j for j in range(len(header)) if j != label_idx]
    values = np.empty((len(body), len(data_cols)))
    labels = [] if label_idx is not None else None
    for i, r in enumerate(body, start=1):
        if len(r) != len(header):
            raise DatasetError(f"data row {i} has {len(r)} cells, header has {len(header)}")
        for k, j in enumerate(data_cols):
            values[i - 1, k] = _parse_cell(r[j].strip(), i, header[j])
        if labels is not None:
            labels.append(r[label_idx].strip())
    names = tuple(header[j] for j in data_cols)
    return Dataset(names, values, names.index(response), tuple(labels) if labels is not None else None)


def save_csv(dataset: Dataset, path) -> None:
    """Write ``dataset`` so that :func:`load_csv` reads it back bit-identically."""
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = list(dataset.column_names)
        if dataset.row_labels is not None:
            header = [LABEL_COLUMN] + header
        w.writerow(header)
        for i in range(dataset.n_rows):
            cells = ["NA" if math.isnan(v) else repr(float(v)) for v in dataset.values[i]]
            if dataset.row_labels is not None:
                cells = [dataset.row_labels[i]] + cells
            w.writerow(cells)


def yoy_transform(series) -> list:
    """Year-on-year percent change: ``100 * (s[t+1] - s[t]) / s[t]``."""
    s = [float(v) for v in series]
    if len(s) < 2:
        raise TooShort("need at least two observations")
    out = []
    for t in range(len(s) - 1):
        if s[t] == 0.0:
            raise DivisionByZero(t)
        out.append(100.0 * (s[t + 1] - s[t]) / s[t])
    return out


def standardize(dataset: Dataset, include_response: bool = False) -> Dataset:
    """Rescale predictor columns to mean 0, sample std 1 over non-missing cells."""
    vals = np.array(dataset.values, copy=True)
    cols = dataset.predictor_indices + ([dataset.response_index] if include_response else [])
    for j in cols:
        st = column_stats(vals[:, j])
        if not st.std_dev > 0:
            raise ZeroVariance(dataset.column_names[j])
        vals[:, j] = (vals[:, j] - st.mean) / st.std_dev
    return dataset.replace_values(vals)
