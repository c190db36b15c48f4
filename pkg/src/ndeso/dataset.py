"""Dataset container, CSV ingestion/emission and the synthetic 3-class generator."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

# Class centers for the synthetic generator. Extra classes (beyond three) are
# placed on a ring around the centroid of the first three.
SYNTHETIC_CENTERS = ((0.0, 0.0), (3.0, 0.0), (1.5, 2.6))
SYNTHETIC_COUNTS = (50, 500, 100)
SYNTHETIC_NOISE = 0.75


class DatasetError(ValueError):
    """Raised when input data violates the dataset invariants."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """An n x d feature matrix with one class id per row.

    ``labels`` holds dense integer ids; ``classes[i]`` is the original label
    string for id ``i``. Arrays are stored read-only.
    """

    features: np.ndarray
    labels: np.ndarray
    classes: tuple[str, ...]
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64)
        y = np.array(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise DatasetError(f"features must be 2-D, got shape {X.shape}")
        n, d = X.shape
        if n < 1 or d < 1:
            raise DatasetError(f"dataset needs n >= 1 and d >= 1, got n={n}, d={d}")
        if not np.all(np.isfinite(X)):
            raise DatasetError("features contain NaN or Inf")
        if y.shape != (n,):
            raise DatasetError(f"labels length {y.shape} does not match n={n}")
        c = len(self.classes)
        if c < 1:
            raise DatasetError("at least one class is required")
        if y.min() < 0 or y.max() >= c:
            raise DatasetError("label id out of range of the class list")
        empty = np.flatnonzero(np.bincount(y, minlength=c) == 0)
        if empty.size:
            raise DatasetError(f"class {self.classes[empty[0]]!r} has no members")
        if self.feature_names is not None and len(self.feature_names) != d:
            raise DatasetError("feature_names length does not match d")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "classes", tuple(str(s) for s in self.classes))
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @classmethod
    def from_raw(cls, features, raw_labels: Iterable, feature_names=None) -> "Dataset":
        """Build a dataset from label strings; ids follow first appearance."""
        mapping: dict[str, int] = {}
        ids = []
        for lab in raw_labels:
            key = str(lab)
            if key not in mapping:
                mapping[key] = len(mapping)
            ids.append(mapping[key])
        return cls(features, np.asarray(ids, dtype=np.int64), tuple(mapping), feature_names)

    def with_rows(self, features, labels) -> "Dataset":
        """Same class list and feature names, new rows."""
        return Dataset(features, labels, self.classes, self.feature_names)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def raw_labels(self) -> list[str]:
        return [self.classes[i] for i in self.labels]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.classes == other.classes
            and self.features.shape == other.features.shape
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.features, other.features)
        )

    __hash__ = None


@dataclass(frozen=True)
class ClassStats:
    counts: dict[str, int]
    majority: int
    minority: int
    imbalance_ratio: float
    n: int


def class_stats(dataset: Dataset) -> ClassStats:
    counts = dataset.counts()
    return _stats_from_counts(dict(zip(dataset.classes, (int(c) for c in counts))))


def _stats_from_counts(counts: dict[str, int]) -> ClassStats:
    values = list(counts.values())
    majority, minority = max(values), min(values)
    return ClassStats(counts, majority, minority, majority / minority, sum(values))


def load_csv(path, has_header: bool = False, label_column: int = -1) -> Dataset:
    """Read a comma separated file of numeric features plus one label column.

    Raises DatasetError naming the offending (row, column) on parse failure;
    rows and columns are reported 1-based as they appear in the file.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DatasetError(f"{path}: empty file")
    header = None
    first_line = 1
    if has_header:
        header, rows = rows[0], rows[1:]
        first_line = 2
        if not rows:
            raise DatasetError(f"{path}: header but no data rows")
    width = len(header) if header is not None else len(rows[0])
    if width < 2:
        raise DatasetError(f"{path}: need at least one feature column and a label column")
    lc = label_column if label_column >= 0 else width + label_column
    if not 0 <= lc < width:
        raise DatasetError(f"{path}: label column {label_column} out of range for {width} columns")

    X = np.empty((len(rows), width - 1), dtype=np.float64)
    labels = []
    for r, row in enumerate(rows):
        line = first_line + r
        if len(row) != width:
            raise DatasetError(f"{path}: row {line} has {len(row)} fields, expected {width}")
        j = 0
        for col, cell in enumerate(row):
            if col == lc:
                lab = cell.strip()
                if not lab:
                    raise DatasetError(f"{path}: empty label at row {line}, column {col + 1}")
                labels.append(lab)
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DatasetError(
                    f"{path}: cannot parse {cell!r} as a number at row {line}, column {col + 1}"
                ) from None
            if not math.isfinite(v):
                raise DatasetError(f"{path}: non-finite value at row {line}, column {col + 1}")
            X[r, j] = v
            j += 1
    names = None
    if header is not None:
        names = tuple(h.strip() for i, h in enumerate(header) if i != lc)
    return Dataset.from_raw(X, labels, names)


def write_csv(dataset: Dataset, path) -> None:
    """Write a header row, then features and label per sample (17 significant digits).

    Read the file back with ``load_csv(path, has_header=True)``.
    """
    names = dataset.feature_names or tuple(f"x{j}" for j in range(dataset.d))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + ["label"])
        for row, lab in zip(dataset.features, dataset.labels):
            w.writerow([format(float(v), ".17g") for v in row] + [dataset.classes[lab]])


def _centers(n_classes: int) -> np.ndarray:
    centers = list(SYNTHETIC_CENTERS[:n_classes])
    if n_classes > len(SYNTHETIC_CENTERS):
        hub = np.mean(SYNTHETIC_CENTERS, axis=0)
        extra = n_classes - len(SYNTHETIC_CENTERS)
        for i in range(extra):
            theta = 2.0 * np.pi * i / extra
            centers.append((hub[0] + 4.5 * np.cos(theta), hub[1] + 4.5 * np.sin(theta)))
    return np.asarray(centers, dtype=np.float64)


def generate_synthetic(
    seed: int,
    counts: Sequence[int] = SYNTHETIC_COUNTS,
    noise_scale: float = SYNTHETIC_NOISE,
) -> Dataset:
    """Overlapping 2-D Gaussian blobs, one per class, labelled "0", "1", ...

    Each point is its class center plus standard normal noise times
    ``noise_scale``; classes are emitted in order, drawn from a PCG64 stream.
    """
    counts = [int(c) for c in counts]
    if not counts or min(counts) < 1:
        raise DatasetError("every class count must be >= 1")
    if not noise_scale >= 0:
        raise DatasetError("noise_scale must be >= 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    centers = _centers(len(counts))
    blocks = []
    for center, m in zip(centers, counts):
        blocks.append(center + noise_scale * rng.standard_normal((m, 2)))
    X = np.vstack(blocks)
    y = np.repeat(np.arange(len(counts)), counts)
    return Dataset(X, y, tuple(str(i) for i in range(len(counts))), ("x0", "x1"))


def _blobs(seed: int, counts: Sequence[int], d: int, spread: float) -> Dataset:
    rng = np.random.Generator(np.random.PCG64(seed))
    centers = rng.uniform(-2.0, 2.0, size=(len(counts), d))
    X = np.vstack([c + spread * rng.standard_normal((m, d)) for c, m in zip(centers, counts)])
    y = np.repeat(np.arange(len(counts)), counts)
    return Dataset(X, y, tuple(f"c{i}" for i in range(len(counts))))


def bundled_datasets() -> dict[str, Dataset]:
    """Small deterministic datasets shipped with the package.

    Besides the default synthetic set, three multi-dimensional blob sets reuse
    the class-count profiles of well known imbalanced benchmarks, including
    singleton and two-member classes.
    """
    return {
        "synthetic": generate_synthetic(20240101),
        "autos_shape": _blobs(11, [48, 46, 29, 20, 13, 3], 6, 1.0),
        "lymphography_shape": _blobs(12, [81, 61, 4, 2], 5, 1.2),
        "ecoli_shape": _blobs(13, [139, 77, 52, 35, 20, 5, 4, 2, 2], 7, 1.0),
    }
