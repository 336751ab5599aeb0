"""Datasets: seeded synthetic generators and CSV / LIBSVM loaders.

Synthetic "blobs" places one spherical Gaussian per class, class means
sitting on a scaled simplex with pairwise distance 2, then standardizes
every feature dimension; "spirals" interleaves class arms in the first
two dimensions. Both are fully determined by their seed.

File loaders parse the whole file strictly (malformed rows are reported
with their line number) and remap labels to 0..K-1 in order of first
appearance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dataset",
    "SplitDataset",
    "DatasetFormatError",
    "generate_synthetic",
    "load_dataset",
    "parse_csv_row",
    "parse_libsvm_line",
    "split_dataset",
]


class DatasetFormatError(ValueError):
    """Raised on malformed dataset files; the message names the line."""


@dataclass
class Dataset:
    """A labeled set: features (n, d) float64, labels (n,) int64."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=int)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError("features and labels disagree in shape")

    def __len__(self):
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def num_classes(self) -> int:
        return int(self.y.max()) + 1 if len(self) else 0


@dataclass
class SplitDataset:
    train: Dataset
    val: Dataset
    test: Dataset

    @property
    def dim(self) -> int:
        return self.train.dim

    @property
    def num_classes(self) -> int:
        return int(max(d.y.max() for d in (self.train, self.val, self.test) if len(d))) + 1


def _blob_means(d: int, num_classes: int) -> np.ndarray:
    # simplex vertices scaled so every pair of means is distance 2 apart
    means = np.zeros((num_classes, d))
    means[:, :num_classes] = np.sqrt(2.0) * np.eye(num_classes)
    return means


def _standardize(X: np.ndarray) -> np.ndarray:
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd < 1e-12, 1.0, sd)
    return (X - mu) / sd


def generate_synthetic(
    kind: str,
    n_train: int,
    n_val: int,
    n_test: int,
    d: int,
    num_classes: int,
    noise: float,
    seed: int,
) -> SplitDataset:
    """Seeded synthetic classification data split into train/val/test.

    The same arguments always produce bit-identical arrays. Splits are
    consecutive slices of one draw, so they are disjoint by construction.
    """
    if kind not in ("blobs", "spirals"):
        raise ValueError(f"unknown synthetic kind {kind!r}")
    if min(n_train, n_val, n_test) < 0 or n_train == 0:
        raise ValueError("need n_train > 0 and nonnegative split sizes")
    if num_classes < 2:
        raise ValueError("need at least two classes")
    if noise < 0:
        raise ValueError("noise must be nonnegative")
    n = n_train + n_val + n_test
    rng = np.random.default_rng(seed)
    y = rng.integers(0, num_classes, size=n)
    if kind == "blobs":
        if d < num_classes:
            raise ValueError("blobs needs d >= num_classes for distinct means")
        X = _blob_means(d, num_classes)[y] + noise * rng.standard_normal((n, d))
    else:
        if d < 2:
            raise ValueError("spirals needs d >= 2")
        t = rng.uniform(0.25, 1.0, size=n)
        theta = 3.0 * np.pi * t + 2.0 * np.pi * y / num_classes
        X = np.zeros((n, d))
        X[:, 0] = t * np.cos(theta)
        X[:, 1] = t * np.sin(theta)
        X += noise * rng.standard_normal((n, d))
    X = _standardize(X)
    return SplitDataset(
        train=Dataset(X[:n_train], y[:n_train]),
        val=Dataset(X[n_train : n_train + n_val], y[n_train : n_train + n_val]),
        test=Dataset(X[n_train + n_val :], y[n_train + n_val :]),
    )


def parse_csv_row(row: str):
    """One CSV row: feature columns then an integer label column."""
    parts = [p.strip() for p in row.split(",")]
    if len(parts) < 2:
        raise ValueError("need at least one feature column and a label column")
    try:
        features = np.array([float(p) for p in parts[:-1]])
        label = int(parts[-1])
    except ValueError as exc:
        raise ValueError(str(exc)) from None
    return features, label


def parse_libsvm_line(line: str):
    """One LIBSVM line: ``label idx:value ...`` with 1-based indices.

    Returns ``(pairs, label)`` where pairs is a list of ``(index, value)``
    with 0-based indices.
    """
    parts = line.split()
    if not parts:
        raise ValueError("empty line")
    try:
        label = int(float(parts[0]))
    except ValueError:
        raise ValueError(f"bad label {parts[0]!r}") from None
    pairs = []
    for tok in parts[1:]:
        idx, _, val = tok.partition(":")
        if not _:
            raise ValueError(f"bad feature token {tok!r}")
        try:
            i = int(idx)
            v = float(val)
        except ValueError:
            raise ValueError(f"bad feature token {tok!r}") from None
        if i < 1:
            raise ValueError(f"feature index {i} must be >= 1")
        pairs.append((i - 1, v))
    return pairs, label


def load_dataset(path, fmt: str = "csv") -> Dataset:
    """Load a whole file; labels remapped to 0..K-1 by first appearance."""
    if fmt not in ("csv", "libsvm"):
        raise ValueError(f"format must be 'csv' or 'libsvm', got {fmt!r}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    rows = []
    raw_labels = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            if fmt == "csv":
                features, label = parse_csv_row(stripped)
                if width is None:
                    width = features.shape[0]
                elif features.shape[0] != width:
                    raise ValueError(
                        f"expected {width} feature columns, got {features.shape[0]}"
                    )
                rows.append(features)
            else:
                pairs, label = parse_libsvm_line(stripped)
                rows.append(pairs)
            raw_labels.append(label)
        except ValueError as exc:
            raise DatasetFormatError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise DatasetFormatError(f"{path}: no data rows")
    if fmt == "libsvm":
        width = max((i for pairs in rows for i, _ in pairs), default=-1) + 1
        X = np.zeros((len(rows), width))
        for rix, pairs in enumerate(rows):
            for i, v in pairs:
                X[rix, i] = v
    else:
        X = np.stack(rows)
    remap: dict[int, int] = {}
    for lab in raw_labels:
        if lab not in remap:
            remap[lab] = len(remap)
    y = np.array([remap[lab] for lab in raw_labels])
    return Dataset(X, y)


def split_dataset(data: Dataset, val_fraction: float, test_fraction: float, seed: int) -> SplitDataset:
    """Shuffle once with a seeded generator and cut train/val/test."""
    if not 0 <= val_fraction < 1 or not 0 <= test_fraction < 1:
        raise ValueError("fractions must lie in [0, 1)")
    if val_fraction + test_fraction >= 1:
        raise ValueError("val and test fractions leave no training data")
    n = len(data)
    order = np.random.default_rng([seed, 11]).permutation(n)
    n_val = int(n * val_fraction)
    n_test = int(n * test_fraction)
    n_train = n - n_val - n_test
    idx_train = order[:n_train]
    idx_val = order[n_train : n_train + n_val]
    idx_test = order[n_train + n_val :]
    return SplitDataset(
        train=Dataset(data.X[idx_train], data.y[idx_train]),
        val=Dataset(data.X[idx_val], data.y[idx_val]),
        test=Dataset(data.X[idx_test], data.y[idx_test]),
    )
