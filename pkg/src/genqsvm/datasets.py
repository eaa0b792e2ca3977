"""Dataset synthesis, CSV ingestion, [-1, 1] scaling, and stratified splits."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from .errors import DataError


@dataclass
class Dataset:
    """Feature matrix with dense integer class ids.

    ``class_names`` maps each id back to the label it was read or generated
    as.  ``scaler`` records the transform applied to ``features``, if any.
    """

    features: np.ndarray
    labels: np.ndarray
    class_names: list
    scaler: "SymmetricMinMaxScaler | None" = None
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.features = np.atleast_2d(np.asarray(self.features,
                                                 dtype=np.float64))
        self.labels = np.asarray(self.labels, dtype=int)
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("labels must match the feature rows")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


class SymmetricMinMaxScaler(BaseEstimator, TransformerMixin):
    """Column-wise affine map sending the fitted min/max to -1/+1.

    Values outside the fitted range extend beyond [-1, 1] unchanged by the
    same affine law.  Constant columns transform to 0 everywhere.
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.data_min_ = X.min(axis=0)
        self.data_max_ = X.max(axis=0)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "data_min_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"scaler was fit on {self.n_features_in_} columns, "
                f"got {X.shape[1]}"
            )
        span = self.data_max_ - self.data_min_
        out = np.zeros_like(X)
        varying = span > 0
        out[:, varying] = (
            2.0 * (X[:, varying] - self.data_min_[varying]) / span[varying]
            - 1.0
        )
        return out


def fit_scaler(train: Dataset) -> SymmetricMinMaxScaler:
    """Fit the [-1, 1] scaler on a training partition."""
    if train.n_samples == 0:
        raise ValueError("cannot fit a scaler on an empty dataset")
    return SymmetricMinMaxScaler().fit(train.features)


def apply_scaler(scaler: SymmetricMinMaxScaler, dataset: Dataset) -> Dataset:
    """Return a copy of ``dataset`` with scaled features."""
    return replace(dataset, features=scaler.transform(dataset.features),
                   scaler=scaler)


def make_moons(n: int, noise: float = 0.2, seed=None) -> Dataset:
    """Two interleaving half circles with isotropic Gaussian noise.

    Class 0 points sit on the upper unit semicircle ``(cos t, sin t)`` and
    class 1 points on ``(1 - cos t, 0.5 - sin t)`` with ``t`` uniform on
    [0, pi], before noise.
    """
    if n < 2:
        raise ValueError("need at least two points")
    rng = np.random.default_rng(seed)
    n0 = math.ceil(n / 2)
    n1 = n // 2
    t0 = rng.uniform(0.0, np.pi, n0)
    t1 = rng.uniform(0.0, np.pi, n1)
    X = np.vstack([
        np.column_stack([np.cos(t0), np.sin(t0)]),
        np.column_stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)]),
    ])
    X = X + rng.normal(0.0, noise, X.shape)
    labels = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])
    return Dataset(X, labels, class_names=[0, 1])


def make_blobs(n: int, centers, n_features: int | None = None,
               spread: float = 0.1, seed=None) -> Dataset:
    """Gaussian point clouds around class centers.

    ``centers`` is either an explicit (k, d) array or a class count, in
    which case centers are drawn uniformly from [-1, 1]^d.
    """
    if n < 2:
        raise ValueError("need at least two points")
    rng = np.random.default_rng(seed)
    if np.isscalar(centers):
        if n_features is None:
            raise ValueError("n_features is required with a center count")
        centers = rng.uniform(-1.0, 1.0, (int(centers), n_features))
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    k = centers.shape[0]
    if k < 1 or n < k:
        raise ValueError("need at least one point per center")
    counts = np.full(k, n // k)
    counts[: n % k] += 1
    rows, labels = [], []
    for c in range(k):
        rows.append(centers[c] + rng.normal(0.0, spread,
                                            (counts[c], centers.shape[1])))
        labels.append(np.full(counts[c], c, dtype=int))
    return Dataset(np.vstack(rows), np.concatenate(labels),
                   class_names=list(range(k)))


def split_indices(labels, train_fraction: float,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Stratified index split.

    Every class with at least two members lands in both partitions;
    single-member classes go to the training side with a warning.  Class
    quotas follow the largest-remainder rule so the overall train size is
    ``round(train_fraction * len(labels))`` whenever the stratification
    constraints allow it.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    labels = np.asarray(labels)
    total = labels.shape[0]
    if total < 2:
        raise ValueError("need at least two points to split")
    classes, counts = np.unique(labels, return_counts=True)
    target = min(max(int(round(train_fraction * total)), 1), total - 1)

    quota = train_fraction * counts
    take = np.floor(quota).astype(int)
    remainder_order = np.argsort(-(quota - take), kind="stable")
    for idx in remainder_order[: target - take.sum()]:
        take[idx] += 1

    singles = counts == 1
    if singles.any():
        warnings.warn(
            f"{int(singles.sum())} class(es) have a single member; "
            "they are placed in the training partition",
            UserWarning,
        )
    low = np.ones_like(take)
    high = np.where(singles, 1, counts - 1)
    take = np.clip(take, low, high)
    # Rebalance toward the target where the per-class bounds allow it.
    while take.sum() > target and (take > low).any():
        c = int(np.argmax(np.where(take > low, take, -1)))
        take[c] -= 1
    while take.sum() < target and (take < high).any():
        c = int(np.argmin(np.where(take < high, take, np.iinfo(int).max)))
        take[c] += 1

    train_parts, test_parts = [], []
    for c, cls in enumerate(classes):
        members = np.flatnonzero(labels == cls)
        order = rng.permutation(members.shape[0])
        train_parts.append(members[order[: take[c]]])
        test_parts.append(members[order[take[c]:]])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    return train_idx, test_idx


def split(dataset: Dataset, train_fraction: float,
          seed=None) -> tuple[Dataset, Dataset]:
    """Stratified random split into training and test datasets."""
    rng = np.random.default_rng(seed)
    train_idx, test_idx = split_indices(dataset.labels, train_fraction, rng)
    train = replace(dataset, features=dataset.features[train_idx],
                    labels=dataset.labels[train_idx])
    test = replace(dataset, features=dataset.features[test_idx],
                   labels=dataset.labels[test_idx])
    return train, test


def load_csv(path, label_column: str) -> Dataset:
    """Read a headered CSV into a dataset.

    Non-label columns are parsed as floats in header order.  A column whose
    every cell fails float parsing is treated as categorical and integer
    coded by first appearance; a column with only some unparseable cells is
    an error naming the first offending cell.  Labels are mapped to dense
    ids in first-appearance order.
    """
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            rows = [row for row in reader if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if header is None:
        raise DataError(f"{path}: missing header row")
    header = [name.strip() for name in header]
    if label_column not in header:
        raise DataError(f"{path}: no column named {label_column!r}")
    if not rows:
        raise DataError(f"{path}: no data rows")
    label_pos = header.index(label_column)
    width = len(header)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise DataError(
                f"{path}: row {r + 2} has {len(row)} cells, expected {width}"
            )

    feature_names = [name for name in header if name != label_column]
    columns = []
    for pos, name in enumerate(header):
        if pos == label_pos:
            continue
        cells = [row[pos].strip() for row in rows]
        parsed = []
        bad_row = None
        for r, cell in enumerate(cells):
            try:
                parsed.append(float(cell))
            except ValueError:
                bad_row = r
                break
        if bad_row is None:
            columns.append(np.asarray(parsed))
        else:
            if any(_parses_as_float(cell) for cell in cells):
                raise DataError(
                    f"{path}: row {bad_row + 2}, column {name!r}: "
                    f"cannot parse {cells[bad_row]!r} as a number"
                )
            codes: dict[str, int] = {}
            columns.append(np.asarray(
                [codes.setdefault(cell, len(codes)) for cell in cells],
                dtype=np.float64,
            ))

    label_codes: dict[str, int] = {}
    labels = [label_codes.setdefault(row[label_pos].strip(), len(label_codes))
              for row in rows]
    return Dataset(np.column_stack(columns), np.asarray(labels, dtype=int),
                   class_names=list(label_codes),
                   feature_names=feature_names)


def _parses_as_float(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def export_csv(dataset: Dataset, path, label_name: str = "label") -> None:
    """Write a dataset as a headered CSV with the label column last."""
    names = dataset.feature_names
    if names is None:
        names = [f"x{k}" for k in range(dataset.n_features)]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        handle.write(",".join([*names, label_name]) + "\n")
        for row, label in zip(dataset.features, dataset.labels):
            cells = [repr(float(v)) for v in row]
            cells.append(str(dataset.class_names[label]))
            handle.write(",".join(cells) + "\n")
