"""Tabular datasets: CSV ingestion, normalization statistics, splitting."""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateColumn, DimensionMismatch, EmptyFile, MissingTarget, NonFinite, ParseError, TooFewRows, ValidationError

TARGET_SD_FLOOR = 1e-12


def fmt_real(x):
    """17 significant digits: enough for an exact float64 round trip."""
    return format(float(x), ".17g")


@dataclass
class TabularDataset:
    X: np.ndarray
    y: np.ndarray | None
    feature_names: list
    target_name: str | None = None
    source: str = ""
    dropped_rows: list = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim != 2:
            raise DimensionMismatch(f"X must be 2-D, got shape {self.X.shape}")
        if not np.all(np.isfinite(self.X)):
            raise NonFinite("feature matrix has non-finite values")
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=np.float64).reshape(-1)
            if self.y.shape[0] != self.X.shape[0]:
                raise DimensionMismatch(f"{self.X.shape[0]} feature rows but {self.y.shape[0]} targets")
            if not np.all(np.isfinite(self.y)):
                raise NonFinite("target vector has non-finite values")
        self.feature_names = [str(c) for c in self.feature_names]
        if len(self.feature_names) != self.X.shape[1]:
            raise DimensionMismatch("one feature name per column is required")
        names = self.feature_names + ([self.target_name] if self.target_name is not None else [])
        if len(set(names)) != len(names):
            raise ValidationError(f"column names must be unique: {names}")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def D(self):
        return self.X.shape[1]

    def subset(self, rows):
        rows = np.asarray(rows, dtype=np.intp)
        return TabularDataset(self.X[rows], None if self.y is None else self.y[rows],
                              list(self.feature_names), self.target_name, self.source)


def _resolve_target(header, target):
    if target is None:
        return None
    if isinstance(target, str):
        if target in header:
            return header.index(target)
        try:
            target = int(target)
        except ValueError:
            raise MissingTarget(f"target column {target!r} not in header {header}") from None
    idx = int(target)
    if not -len(header) <= idx < len(header):
        raise MissingTarget(f"target index {idx} out of range for {len(header)} columns")
    return idx % len(header)


def load_csv(path, target=-1, delimiter=",", drop_invalid=False):
    """Read a numeric CSV with a header row.

    ``target`` is a column name or index (``None`` loads features only).
    Lines starting with ``#`` are treated as comments. A row with a blank
    or non-numeric cell raises :class:`ParseError` (file line and column
    number) unless ``drop_invalid`` is set, in which case it is skipped
    and its line number recorded in ``dropped_rows``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [(i, line) for i, line in enumerate(fh, start=1)
                 if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise EmptyFile(f"{path}: no header row")
    reader = csv.reader([line for _, line in lines], delimiter=delimiter)
    rows = list(reader)
    header = [h.strip() for h in rows[0]]
    t = _resolve_target(header, target)
    values, dropped = [], []
    for (lineno, _), row in zip(lines[1:], rows[1:]):
        if len(row) != len(header):
            err = ParseError(lineno, len(row) + 1, f"expected {len(header)} cells, got {len(row)}")
            if drop_invalid:
                dropped.append(lineno)
                continue
            raise err
        parsed = []
        for col, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                if drop_invalid:
                    break
                raise ParseError(lineno, col, f"non-numeric or missing value {cell!r}")
            parsed.append(v)
        if len(parsed) != len(header):
            dropped.append(lineno)
            continue
        values.append(parsed)
    if not values:
        raise EmptyFile(f"{path}: no data rows")
    A = np.array(values, dtype=np.float64)
    features = [j for j in range(len(header)) if j != t]
    return TabularDataset(
        X=A[:, features],
        y=None if t is None else A[:, t],
        feature_names=[header[j] for j in features],
        target_name=None if t is None else header[t],
        source=str(path),
        dropped_rows=dropped,
    )


def write_meta_line(fh, meta):
    if meta:
        fh.write("# meta: " + json.dumps(meta, sort_keys=True) + "\n")


def save_table(path, columns, rows, meta=None, delimiter=","):
    """Write a CSV with an optional ``# meta:`` header line; reals use 17 digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_meta_line(fh, meta)
        fh.write(delimiter.join(columns) + "\n")
        for row in rows:
            fh.write(delimiter.join(fmt_real(v) if isinstance(v, (float, np.floating)) else str(v)
                                    for v in row) + "\n")


def save_csv(ds, path, meta=None, delimiter=","):
    cols = list(ds.feature_names)
    data = ds.X
    if ds.y is not None:
        cols.append(ds.target_name or "y")
        data = np.column_stack([ds.X, ds.y])
    save_table(path, cols, (map(float, r) for r in data), meta=meta, delimiter=delimiter)


def train_test_split(ds, fraction=0.5, seed=0):
    """Seeded shuffle; the first ``ceil(fraction * n)`` shuffled rows train."""
    if not 0 < fraction < 1:
        raise ValidationError(f"fraction must lie in (0, 1), got {fraction}")
    if ds.n < 2:
        raise TooFewRows("need at least 2 rows to split")
    perm = np.random.default_rng(seed).permutation(ds.n)
    k = math.ceil(fraction * ds.n)
    return ds.subset(np.sort(perm[:k])), ds.subset(np.sort(perm[k:]))


@dataclass(frozen=True, eq=False)
class NormalizationStats:
    """Column means/sds (population convention) and target mean/sd."""

    means: np.ndarray
    sds: np.ndarray
    y_mean: float = 0.0
    y_sd: float = 1.0

    def transform_X(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.means.size:
            raise DimensionMismatch(f"expected {self.means.size} feature columns, got shape {X.shape}")
        return (X - self.means) / self.sds

    def inverse_X(self, Z):
        return np.asarray(Z) * self.sds + self.means

    def transform_y(self, y):
        return (np.asarray(y, dtype=np.float64) - self.y_mean) / self.y_sd

    def inverse_y(self, z):
        return np.asarray(z, dtype=np.float64) * self.y_sd + self.y_mean


def normalization_stats(X, y=None):
    """Per-column mean and standard deviation (1/n convention).

    Raises :class:`DegenerateColumn` listing every constant feature. A
    constant target is allowed; its sd is floored at ``TARGET_SD_FLOOR``.
    """
    if isinstance(X, TabularDataset):
        X, y = X.X, X.y
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-D, got shape {X.shape}")
    if X.shape[0] < 2:
        raise TooFewRows("normalization needs at least 2 rows")
    means = X.mean(axis=0)
    sds = X.std(axis=0)
    bad = np.flatnonzero(sds <= 1e-12 * np.maximum(1.0, np.abs(means)))
    if bad.size:
        raise DegenerateColumn(bad.tolist())
    y_mean, y_sd = 0.0, 1.0
    if y is not None:
        y = np.asarray(y, dtype=np.float64)
        y_mean = float(y.mean())
        y_sd = max(float(y.std()), TARGET_SD_FLOOR)
    means.setflags(write=False)
    sds.setflags(write=False)
    return NormalizationStats(means, sds, y_mean, y_sd)
