"""NDESO and baseline resamplers behind one dispatch function.

Every resampler takes a ``Dataset`` and a ``numpy.random.Generator`` and
returns a new ``Dataset``. Methods that cannot run on the given data raise
``ResamplingError``; ``resample`` converts that into a failed
``ResampleOutcome`` so experiment grids can record the failure and carry on.
Oversamplers keep the original rows first, in order, and append new rows
class by class; undersamplers keep surviving rows in their original order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset
from .geometry import EUCLIDEAN, DistanceMetric, cross_distances, neighbor_index
from .nde import displace

METHODS = (
    "ndeso", "nde_only", "random_over", "random_under", "smote",
    "enn", "tomek_links", "near_miss", "smote_tomek", "smote_enn",
)
DEFAULT_K = {"ndeso": 5, "nde_only": 5, "smote": 5, "enn": 3, "near_miss": 3,
             "smote_tomek": 5, "smote_enn": 5}
# methods whose k can be walked down by the auto-retry ladder
RETRYABLE = ("smote", "enn", "near_miss", "smote_tomek", "smote_enn")
STOCHASTIC = ("ndeso", "random_over", "random_under", "smote", "smote_tomek", "smote_enn")

NEIGHBOR_MSG = "Expected n_neighbors <= n_samples_fit"


class ResamplingError(RuntimeError):
    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage = stage


@dataclass(frozen=True)
class ResamplerSpec:
    method: str
    k: int | None = None
    metric: DistanceMetric = EUCLIDEAN
    enn_k: int = 3
    augment_same_class_neighbors: bool = True
    auto_retry_k: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")
        object.__setattr__(self, "metric", DistanceMetric.parse(self.metric))

    @property
    def k_value(self) -> int | None:
        return self.k if self.k is not None else DEFAULT_K.get(self.method)

    @property
    def uses_rng(self) -> bool:
        return self.method in STOCHASTIC

    def __str__(self):
        opts = []
        if self.k is not None and self.k != DEFAULT_K.get(self.method):
            opts.append(f"k={self.k}")
        if self.metric != EUCLIDEAN:
            opts.append(f"metric={self.metric}")
        return f"{self.method}({','.join(opts)})" if opts else self.method


@dataclass
class ResampleOutcome:
    dataset: Dataset | None
    status: str
    seconds: float
    message: str = ""
    stage: str | None = None
    k_used: int | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _neighbor_error(k: int, n_fit: int) -> ResamplingError:
    return ResamplingError(
        f"{NEIGHBOR_MSG}, but n_neighbors = {k + 1}, n_samples_fit = {n_fit}, n_samples = {n_fit}"
    )


def random_oversample(dataset: Dataset, rng: np.random.Generator) -> Dataset:
    """Duplicate random members of each class until it matches the majority count."""
    counts = dataset.counts()
    target = counts.max()
    extra = []
    for c, m in enumerate(counts):
        need = target - m
        if need:
            members = np.flatnonzero(dataset.labels == c)
            extra.append(members[rng.integers(0, m, size=need)])
    if not extra:
        return dataset
    take = np.concatenate(extra)
    return dataset.with_rows(
        np.vstack([dataset.features, dataset.features[take]]),
        np.concatenate([dataset.labels, dataset.labels[take]]),
    )


def random_undersample(dataset: Dataset, rng: np.random.Generator) -> Dataset:
    counts = dataset.counts()
    target = counts.min()
    keep = []
    for c, m in enumerate(counts):
        members = np.flatnonzero(dataset.labels == c)
        keep.append(members if m == target else rng.choice(members, size=target, replace=False))
    keep = np.sort(np.concatenate(keep))
    return dataset.with_rows(dataset.features[keep], dataset.labels[keep])


def nde_only(dataset: Dataset, k: int = 5, metric: DistanceMetric = EUCLIDEAN,
             augment_same_class_neighbors: bool = True) -> Dataset:
    X = displace(dataset.features, dataset.labels, metric, k, augment_same_class_neighbors)
    return dataset.with_rows(X, dataset.labels)


def ndeso(dataset: Dataset, k: int = 5, metric: DistanceMetric = EUCLIDEAN,
          rng: np.random.Generator | None = None,
          augment_same_class_neighbors: bool = True) -> Dataset:
    """Displace noisy points, then randomly oversample every class to the majority count."""
    if rng is None:
        rng = np.random.default_rng()
    return random_oversample(nde_only(dataset, k, metric, augment_same_class_neighbors), rng)


def smote(dataset: Dataset, k: int = 5, rng: np.random.Generator | None = None) -> Dataset:
    """SMOTE: interpolate between a random class member and one of its k same-class neighbors.

    Each synthetic point is ``x + u * (y - x)`` with ``u ~ U(0, 1)``.
    """
    if rng is None:
        rng = np.random.default_rng()
    counts = dataset.counts()
    target = counts.max()
    for c, m in enumerate(counts):
        if m < target and m <= k:
            raise _neighbor_error(k, m)
    X, y = dataset.features, dataset.labels
    new_X, new_y = [], []
    for c, m in enumerate(counts):
        need = target - m
        if not need:
            continue
        members = np.flatnonzero(y == c)
        Xc = X[members]
        nbrs = neighbor_index(Xc, k).idxs
        seeds = rng.integers(0, m, size=need)
        picks = nbrs[seeds, rng.integers(0, k, size=need)]
        u = rng.random(need)[:, None]
        new_X.append(Xc[seeds] + u * (Xc[picks] - Xc[seeds]))
        new_y.append(np.full(need, c))
    if not new_X:
        return dataset
    return dataset.with_rows(np.vstack([X] + new_X), np.concatenate([y] + new_y))


def enn(dataset: Dataset, k: int = 3) -> Dataset:
    """Edited nearest neighbors: drop points outvoted by their k nearest neighbors.

    A point survives when its own label is among the most frequent labels of
    its neighbors (ties keep the point).
    """
    n = dataset.n
    if n <= k:
        raise _neighbor_error(k, n)
    y = dataset.labels
    idxs = neighbor_index(dataset.features, k).idxs
    votes = np.zeros((n, dataset.n_classes), dtype=np.int64)
    np.add.at(votes, (np.repeat(np.arange(n), k), y[idxs].ravel()), 1)
    keep = votes[np.arange(n), y] >= votes.max(axis=1)
    kept_counts = np.bincount(y[keep], minlength=dataset.n_classes)
    gone = np.flatnonzero(kept_counts == 0)
    if gone.size:
        raise ResamplingError(f"class eliminated by editing: {dataset.classes[gone[0]]!r}")
    return dataset.with_rows(dataset.features[keep], y[keep])


def tomek_links(dataset: Dataset) -> Dataset:
    """Remove the larger-class member of every Tomek link (mutual 1-NN, labels differ)."""
    if dataset.n < 2:
        raise ResamplingError("tomek_links needs at least 2 points")
    y = dataset.labels
    nn = neighbor_index(dataset.features, 1).idxs[:, 0]
    i = np.arange(dataset.n)
    linked = (nn[nn] == i) & (y[nn] != y) & (i < nn)
    counts = dataset.counts()
    drop = []
    for a in np.flatnonzero(linked):
        b = nn[a]
        ka, kb = (counts[y[a]], y[a]), (counts[y[b]], y[b])
        drop.append(a if ka > kb else b)
    if not drop:
        return dataset
    keep = np.ones(dataset.n, dtype=bool)
    keep[drop] = False
    if np.any(np.bincount(y[keep], minlength=dataset.n_classes) == 0):
        raise ResamplingError("class eliminated by editing")
    return dataset.with_rows(dataset.features[keep], y[keep])


def near_miss(dataset: Dataset, k: int = 3) -> Dataset:
    """NearMiss-1 undersampling.

    Each class above the minority count keeps the members with the smallest
    mean distance to their k nearest points from all other classes.
    """
    counts = dataset.counts()
    target = counts.min()
    X, y = dataset.features, dataset.labels
    keep = []
    for c, m in enumerate(counts):
        members = np.flatnonzero(y == c)
        if m == target:
            keep.append(members)
            continue
        others = np.flatnonzero(y != c)
        if k > others.size:
            raise _neighbor_error(k - 1, others.size)
        D = cross_distances(X[members], X[others])
        nearest = np.sort(D, axis=1)[:, :k]
        order = np.argsort(nearest.mean(axis=1), kind="stable")
        keep.append(members[order[:target]])
    keep = np.sort(np.concatenate(keep))
    return dataset.with_rows(X[keep], y[keep])


def _run_single(spec: ResamplerSpec, dataset: Dataset, rng: np.random.Generator) -> Dataset:
    k = spec.k_value
    m = spec.method
    if m == "ndeso":
        return ndeso(dataset, k, spec.metric, rng, spec.augment_same_class_neighbors)
    if m == "nde_only":
        return nde_only(dataset, k, spec.metric, spec.augment_same_class_neighbors)
    if m == "random_over":
        return random_oversample(dataset, rng)
    if m == "random_under":
        return random_undersample(dataset, rng)
    if m == "smote":
        return smote(dataset, k, rng)
    if m == "enn":
        return enn(dataset, k)
    if m == "tomek_links":
        return tomek_links(dataset)
    if m == "near_miss":
        return near_miss(dataset, k)
    if m == "smote_tomek":
        return compose(replace(spec, method="smote"), ResamplerSpec("tomek_links"))(dataset, rng)
    if m == "smote_enn":
        return compose(replace(spec, method="smote"),
                       ResamplerSpec("enn", k=spec.enn_k))(dataset, rng)
    raise AssertionError(m)


def compose(first: ResamplerSpec, second: ResamplerSpec):
    """Chain two resamplers; a failure is re-raised tagged with the failing stage."""

    def run(dataset: Dataset, rng: np.random.Generator) -> Dataset:
        current = dataset
        for stage in (first, second):
            try:
                current = _run_single(stage, current, rng)
            except ResamplingError as exc:
                raise ResamplingError(str(exc), exc.stage or stage.method) from exc
        return current

    return run


def resample(spec: ResamplerSpec, dataset: Dataset, rng: np.random.Generator) -> ResampleOutcome:
    """Run ``spec`` on ``dataset`` and time it with a monotonic clock.

    With ``spec.auto_retry_k`` a failing neighbor-based baseline is retried
    with k reduced by one until it succeeds or k reaches 1.
    """
    k = spec.k_value
    start = time.perf_counter()
    while True:
        try:
            result = _run_single(replace(spec, k=k) if k is not None else spec, dataset, rng)
        except ResamplingError as exc:
            if spec.auto_retry_k and spec.method in RETRYABLE and k is not None and k > 1:
                k -= 1
                continue
            return ResampleOutcome(None, "failed", time.perf_counter() - start, str(exc),
                                   exc.stage or spec.method, k)
        return ResampleOutcome(result, "ok", time.perf_counter() - start, k_used=k)
