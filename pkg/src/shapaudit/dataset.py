"""Tabular dataset container, CSV I/O, standardization and fold splitting."""

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ConfigError, DataError

REFERENCE_FEATURES = ("concentration", "voltage", "flow_rate", "distance")
REFERENCE_TARGET = "diameter"


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with named columns and a real-valued target.

    ``standardized`` records whether ``X`` has already been passed through
    :func:`standardize`.
    """

    feature_names: tuple
    X: np.ndarray
    y: np.ndarray
    target_name: str = "target"
    units: dict = field(default_factory=dict)
    standardized: bool = False

    def __post_init__(self):
        names = tuple(str(n) for n in self.feature_names)
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if X.ndim != 2:
            raise DataError(f"X must be 2-dimensional, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
        n, d = X.shape
        if n < 2:
            raise DataError(f"a dataset needs at least 2 rows, got {n}")
        if d < 1:
            raise DataError("a dataset needs at least 1 feature column")
        if len(names) != d:
            raise DataError(f"{len(names)} feature names for {d} columns")
        if len(set(names)) != d:
            raise DataError(f"duplicate feature names in {names}")
        if not np.all(np.isfinite(X)):
            i, j = np.argwhere(~np.isfinite(X))[0]
            raise DataError(f"non-finite value in row {i}, column {names[j]!r}")
        if not np.all(np.isfinite(y)):
            raise DataError(f"non-finite target value in row {int(np.argmax(~np.isfinite(y)))}")
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]


def _parse_cell(text, row, column):
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"non-numeric cell {text!r} at row {row}, column {column!r}") from None
    if not math.isfinite(value):
        raise DataError(f"non-finite cell {text!r} at row {row}, column {column!r}")
    return value


def load_csv(path, target_column, units=None):
    """Read a comma-delimited UTF-8 file with a header row.

    All non-target columns become features, in header order. Row numbers in
    error messages count data rows from 1.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        if target_column not in header:
            raise ConfigError(f"target column {target_column!r} not in header {header}")
        rows = []
        for lineno, record in enumerate(reader, start=1):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise DataError(f"row {lineno} has {len(record)} cells, header has {len(header)}")
            rows.append([_parse_cell(c.strip(), lineno, h) for c, h in zip(record, header)])
    if not rows:
        raise DataError(f"{path} has no data rows")
    table = np.array(rows, dtype=np.float64)
    t = header.index(target_column)
    feature_idx = [j for j in range(len(header)) if j != t]
    return Dataset(
        feature_names=tuple(header[j] for j in feature_idx),
        X=table[:, feature_idx],
        y=table[:, t],
        target_name=target_column,
        units=dict(units or {}),
    )


def write_csv(ds, path):
    """Write ``ds`` in the format read by :func:`load_csv` (target last).

    Floats use ``repr`` so values round-trip exactly.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(ds.feature_names) + [ds.target_name])
        for xi, yi in zip(ds.X, ds.y):
            writer.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])
    return path


@dataclass(frozen=True)
class ScalerParams:
    means: np.ndarray
    stds: np.ndarray


class Standardizer(TransformerMixin, BaseEstimator):
    """Column-wise z-scoring with the sample (n - 1) standard deviation."""

    def __init__(self, ddof=1):
        self.ddof = ddof

    def fit(self, X, y=None, feature_names=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[0] <= self.ddof:
            raise DataError(f"need more than {self.ddof} rows to standardize")
        self.mean_ = X.mean(axis=0)
        self.scale_ = X.std(axis=0, ddof=self.ddof)
        names = feature_names if feature_names is not None else [f"x{j}" for j in range(X.shape[1])]
        flat = ~(self.scale_ > 0) | ~np.isfinite(self.scale_)
        if np.any(flat):
            raise DataError(f"zero-variance column {names[int(np.argmax(flat))]!r}")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X, dtype=np.float64)
        return (X - self.mean_) / self.scale_

    def inverse_transform(self, X):
        check_is_fitted(self, "mean_")
        X = check_array(X, dtype=np.float64)
        return X * self.scale_ + self.mean_

    @property
    def params(self):
        return ScalerParams(means=self.mean_.copy(), stds=self.scale_.copy())


def standardize(ds):
    """Z-score every feature column; ``y`` is left untouched."""
    scaler = Standardizer().fit(ds.X, feature_names=ds.feature_names)
    return replace(ds, X=scaler.transform(ds.X), standardized=True), scaler.params


def unstandardize(X, params):
    return np.asarray(X, dtype=np.float64) * params.stds + params.means


@dataclass(frozen=True)
class FoldSplit:
    train_indices: np.ndarray
    test_indices: np.ndarray


def kfold_split(n, k, seed=0, shuffle=True):
    """Partition ``range(n)`` into ``k`` test folds whose sizes differ by at most one.

    The first ``n % k`` folds receive the extra sample.
    """
    n, k = int(n), int(k)
    if k < 2 or k > n:
        raise ConfigError(f"k-fold needs 2 <= k <= n, got k={k}, n={n}")
    order = np.random.default_rng(seed).permutation(n) if shuffle else np.arange(n)
    sizes = np.full(k, n // k)
    sizes[: n % k] += 1
    folds = []
    start = 0
    for size in sizes:
        test = np.sort(order[start : start + size])
        mask = np.ones(n, dtype=bool)
        mask[test] = False
        folds.append(FoldSplit(train_indices=np.flatnonzero(mask), test_indices=test))
        start += size
    return folds


def describe_target(ds):
    """Return ``(mean, std, min, max)`` of the target, std with ddof=1."""
    y = ds.y
    return float(y.mean()), float(y.std(ddof=1)), float(y.min()), float(y.max())


@dataclass(frozen=True)
class DesignFactor:
    name: str
    unit: str
    levels: tuple  # physical values at coded levels -1, -0.5, 0, +1


@dataclass(frozen=True)
class RsmDesign:
    factors: tuple

    def __post_init__(self):
        if len(self.factors) != 4 or any(len(f.levels) != 4 for f in self.factors):
            raise ConfigError("an RSM design here has exactly 4 factors with 4 levels each")


PVA_DESIGN = RsmDesign(
    factors=(
        DesignFactor("concentration", "wt%", (8.0, 9.0, 10.0, 12.0)),
        DesignFactor("voltage", "kV", (15.0, 20.0, 22.5, 25.0)),
        DesignFactor("flow_rate", "mL/h", (0.20, 0.25, 0.30, 0.40)),
        DesignFactor("distance", "cm", (10.0, 12.5, 15.0, 20.0)),
    )
)

REFERENCE_UNITS = {f.name: f.unit for f in PVA_DESIGN.factors} | {REFERENCE_TARGET: "nm"}


@dataclass(frozen=True)
class DesignValidation:
    off_design: dict  # factor name -> sorted off-level values seen in the data

    @property
    def passed(self):
        return not any(self.off_design.values())


def validate_against_design(ds, design=PVA_DESIGN, atol=1e-9):
    """Flag, per factor, observed raw values that are not one of its design levels.

    Columns are matched to factors by position. Off-design values are
    reported, never raised.
    """
    X = np.asarray(ds.X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("cannot validate an empty dataset")
    if X.shape[1] != len(design.factors):
        raise DataError(f"dataset has {X.shape[1]} columns, design has {len(design.factors)} factors")
    report = {}
    for j, factor in enumerate(design.factors):
        levels = np.asarray(factor.levels)
        col = X[:, j]
        hit = np.any(np.abs(col[:, None] - levels[None, :]) <= atol, axis=1)
        report[factor.name] = sorted(set(col[~hit].tolist()))
    return DesignValidation(off_design=report)
