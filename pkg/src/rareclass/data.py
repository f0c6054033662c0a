"""Dataset loading and per-column exploratory statistics.

Feature matrices are dense float64 arrays with NaN marking missing cells.
Column identifiers are the original 0-based column indices and are preserved
unchanged through any downstream pruning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "FeatureMatrix",
    "Dataset",
    "ColumnStats",
    "ProvenanceRecord",
    "DataError",
    "load_secom",
    "load_delimited",
    "column_stats",
    "correlation_matrix",
]


class DataError(ValueError):
    """Raised for malformed or inconsistent input files."""


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense table of optional reals. NaN encodes a missing cell."""

    values: np.ndarray       # (n_rows, n_cols) float64
    column_ids: np.ndarray   # (n_cols,) int64, stable original indices

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        c = np.asarray(self.column_ids, dtype=np.int64)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "column_ids", c)
        if v.ndim != 2:
            raise DataError("feature values must be 2-dimensional")
        if c.shape != (v.shape[1],):
            raise DataError("column_ids length must match number of columns")
        if len(np.unique(c)) != len(c):
            raise DataError("column_ids must be unique")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def present(self) -> np.ndarray:
        """Boolean mask of present (non-missing) cells."""
        return ~np.isnan(self.values)

    def column_index(self, column_id: int) -> int:
        pos = np.nonzero(self.column_ids == column_id)[0]
        if len(pos) == 0:
            raise KeyError(f"unknown column id {column_id}")
        return int(pos[0])

    def select_columns(self, keep_ids) -> "FeatureMatrix":
        """Subset to the given column ids, preserving their identifiers."""
        keep = np.asarray(keep_ids, dtype=np.int64)
        idx = [self.column_index(c) for c in keep]
        return FeatureMatrix(self.values[:, idx], self.column_ids[idx])

    def take_rows(self, row_idx) -> "FeatureMatrix":
        idx = np.asarray(row_idx, dtype=np.int64)
        return FeatureMatrix(self.values[idx], self.column_ids.copy())


@dataclass(frozen=True)
class ProvenanceRecord:
    operation: str
    parameters: dict
    columns: tuple = ()


@dataclass(frozen=True)
class Dataset:
    """FeatureMatrix plus binary labels (1 = fail/minority positive class)."""

    features: FeatureMatrix
    labels: np.ndarray                    # (n_rows,) int64 in {0, 1}
    provenance: tuple = ()

    def __post_init__(self):
        y = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if y.shape != (self.features.n_rows,):
            raise DataError("labels length must equal number of rows")
        if not np.isin(y, (0, 1)).all():
            raise DataError("labels must be binary 0/1")

    @property
    def n_rows(self) -> int:
        return self.features.n_rows

    @property
    def n_cols(self) -> int:
        return self.features.n_cols

    @property
    def column_ids(self) -> np.ndarray:
        return self.features.column_ids

    def with_values(self, values: np.ndarray, record: ProvenanceRecord | None = None) -> "Dataset":
        prov = self.provenance + ((record,) if record else ())
        return Dataset(FeatureMatrix(values, self.features.column_ids.copy()), self.labels.copy(), prov)

    def select_columns(self, keep_ids, record: ProvenanceRecord | None = None) -> "Dataset":
        prov = self.provenance + ((record,) if record else ())
        return Dataset(self.features.select_columns(keep_ids), self.labels.copy(), prov)

    def take_rows(self, row_idx, record: ProvenanceRecord | None = None) -> "Dataset":
        idx = np.asarray(row_idx, dtype=np.int64)
        prov = self.provenance + ((record,) if record else ())
        return Dataset(self.features.take_rows(idx), self.labels[idx], prov)

    def logged(self, operation: str, **parameters) -> "Dataset":
        rec = ProvenanceRecord(operation, parameters)
        return replace(self, provenance=self.provenance + (rec,))


@dataclass(frozen=True)
class ColumnStats:
    column_id: int
    missing_fraction: float
    mean: float | None
    median: float | None
    std: float | None
    skewness: float | None
    min: float | None
    max: float | None
    n_unique: int
    is_constant: bool


def _parse_float(token: str, path: str, line_no: int) -> float:
    if token == "NaN" or token == "":
        return math.nan
    try:
        return float(token)
    except ValueError:
        raise DataError(f"{path}:{line_no}: unparseable numeric token {token!r}") from None


def load_secom(data_path, labels_path) -> Dataset:
    """Load the whitespace-separated sensor file and its labels file.

    The data file uses the literal token "NaN" for missing cells.  Each
    labels line starts with -1 (pass) or 1 (fail); trailing tokens are a
    timestamp, kept only in provenance.
    """
    rows = []
    with open(data_path) as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rows.append([_parse_float(t, str(data_path), line_no) for t in line.split()])
    if not rows:
        raise DataError(f"empty input: {data_path}")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DataError(f"{data_path}: inconsistent column counts {sorted(widths)}")

    labels = []
    first_ts, last_ts = None, None
    with open(labels_path) as fh:
        for line_no, line in enumerate(fh, 1):
            tokens = line.split()
            if not tokens:
                continue
            if tokens[0] not in ("-1", "1"):
                raise DataError(f"{labels_path}:{line_no}: label must be -1 or 1, got {tokens[0]!r}")
            labels.append(0 if tokens[0] == "-1" else 1)
            ts = " ".join(tokens[1:])
            if first_ts is None:
                first_ts = ts
            last_ts = ts
    if not labels:
        raise DataError(f"empty input: {labels_path}")
    if len(labels) != len(rows):
        raise DataError(f"row-count mismatch: {len(rows)} data rows vs {len(labels)} labels")

    values = np.array(rows, dtype=np.float64)
    fm = FeatureMatrix(values, np.arange(values.shape[1]))
    rec = ProvenanceRecord(
        "load_secom",
        {"data_path": str(data_path), "labels_path": str(labels_path),
         "first_timestamp": first_ts, "last_timestamp": last_ts},
    )
    return Dataset(fm, np.array(labels), (rec,))


def load_delimited(path, label_column: str, delimiter: str = ",",
                   missing_tokens=("", "NaN", "NA")) -> Dataset:
    """Load a delimited text file with a header row.

    The label column must hold exactly two distinct values; the less
    frequent one becomes class 1.  A frequency tie is broken by mapping the
    lexicographically larger value to class 1.
    """
    missing = set(missing_tokens)
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise DataError(f"empty input: {path}")
    header = lines[0].split(delimiter)
    if label_column not in header:
        raise DataError(f"label column {label_column!r} not found in header")
    label_pos = header.index(label_column)

    raw_labels = []
    rows = []
    for line_no, line in enumerate(lines[1:], 2):
        tokens = line.split(delimiter)
        if len(tokens) != len(header):
            raise DataError(f"{path}:{line_no}: expected {len(header)} fields, got {len(tokens)}")
        raw_labels.append(tokens[label_pos].strip())
        row = []
        for i, tok in enumerate(tokens):
            if i == label_pos:
                continue
            tok = tok.strip()
            row.append(math.nan if tok in missing else _parse_float(tok, str(path), line_no))
        rows.append(row)
    if not rows:
        raise DataError(f"empty input: {path}")

    distinct = sorted(set(raw_labels))
    if len(distinct) != 2:
        raise DataError(f"label column must have exactly 2 distinct values, got {len(distinct)}")
    counts = {v: raw_labels.count(v) for v in distinct}
    # minority value -> positive class; lexicographic tie-break
    positive = distinct[1] if counts[distinct[0]] == counts[distinct[1]] else min(distinct, key=lambda v: counts[v])
    labels = np.array([1 if v == positive else 0 for v in raw_labels])

    values = np.array(rows, dtype=np.float64)
    fm = FeatureMatrix(values, np.arange(values.shape[1]))
    rec = ProvenanceRecord("load_delimited", {
        "path": str(path), "label_column": label_column, "positive_value": positive,
        "feature_names": [h for i, h in enumerate(header) if i != label_pos],
    })
    return Dataset(fm, labels, (rec,))


def _skewness(x: np.ndarray) -> float:
    """Fisher population skewness; 0 for constant or n < 3 samples."""
    if len(x) < 3:
        return 0.0
    m = x.mean()
    m2 = np.mean((x - m) ** 2)
    if m2 <= 0:
        return 0.0
    m3 = np.mean((x - m) ** 3)
    return float(m3 / m2 ** 1.5)


def column_stats(d: Dataset) -> list[ColumnStats]:
    """Per-column summary over present values only.

    An all-missing column reports missing_fraction 1.0 with absent moments
    and is_constant False.
    """
    out = []
    v = d.features.values
    for j, cid in enumerate(d.column_ids):
        col = v[:, j]
        present = col[~np.isnan(col)]
        miss = 1.0 - len(present) / len(col) if len(col) else 1.0
        if len(present) == 0:
            out.append(ColumnStats(int(cid), 1.0, None, None, None, None, None, None, 0, False))
            continue
        std = float(present.std())
        constant = bool(np.all(present == present[0]))
        out.append(ColumnStats(
            column_id=int(cid),
            missing_fraction=float(miss),
            mean=float(present.mean()),
            median=float(np.median(present)),
            std=0.0 if constant else std,
            skewness=_skewness(present),
            min=float(present.min()),
            max=float(present.max()),
            n_unique=int(len(np.unique(present))),
            is_constant=constant,
        ))
    return out


def correlation_matrix(d: Dataset) -> np.ndarray:
    """Pairwise-complete Pearson correlations.

    Entry (i, j) uses only rows where both columns are present.  Pairs with
    fewer than 2 shared rows or zero variance on the shared rows are NaN.
    The result is exactly symmetric with unit diagonal for non-degenerate
    columns.
    """
    v = d.features.values
    m = (~np.isnan(v)).astype(np.float64)
    x = np.where(np.isnan(v), 0.0, v)

    n = m.T @ m                      # shared present counts
    sx = x.T @ m                     # sx[i,j] = sum of col i over rows where j present
    sxy = x.T @ x
    sxx = (x * x).T @ m

    with np.errstate(invalid="ignore", divide="ignore"):
        cov = sxy - sx * sx.T / n
        var_i = sxx - sx ** 2 / n
        denom = np.sqrt(var_i * var_i.T)
        r = cov / denom

    eps = 1e-12
    bad = (n < 2) | (var_i <= eps * np.maximum(sxx, 1.0)) | (var_i.T <= eps * np.maximum(sxx.T, 1.0))
    r[bad] = np.nan
    r = np.clip(r, -1.0, 1.0)
    r = (r + r.T) / 2.0              # enforce exact symmetry

    # unit diagonal for columns with >= 2 present values and nonzero variance
    diag_ok = (np.diag(n) >= 2) & (np.diag(var_i) > eps * np.maximum(np.diag(sxx), 1.0))
    dg = np.where(diag_ok, 1.0, np.nan)
    np.fill_diagonal(r, dg)
    return r
