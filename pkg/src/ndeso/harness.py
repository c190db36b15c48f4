"""Resample, cross-validate, classify, score; and grids of such runs.

The default protocol resamples the whole dataset first and then runs
stratified k-fold cross-validation on the result, with
``n_splits = min(5, smallest class count)``. ``split_first=True`` instead
splits the original data and resamples only each training portion.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifiers import ClassifierSpec
from .dataset import Dataset
from .metrics import confusion_matrix, gmean, macro_prf
from .resamplers import ResamplerSpec, resample

CV_MSG = "k-fold cross-validation requires at least one train/test split"
MAX_SPLITS = 5
MASK64 = (1 << 64) - 1


class CrossValidationError(ValueError):
    pass


@dataclass
class ExperimentRecord:
    dataset: str
    resampler: str
    classifier: str
    seed: int
    status: str = "ok"
    message: str = ""
    gmean_folds: list[float] = field(default_factory=list)
    precision_macro: float = float("nan")
    recall_macro: float = float("nan")
    f1_macro: float = float("nan")
    resample_seconds: float = 0.0
    split_first: bool = False

    @property
    def folds(self) -> int:
        return len(self.gmean_folds)

    @property
    def gmean_mean(self) -> float:
        return float(np.mean(self.gmean_folds)) if self.gmean_folds else float("nan")

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def n_splits(train_labels) -> int:
    counts = np.bincount(np.asarray(train_labels, dtype=np.int64))
    counts = counts[counts > 0]
    if counts.size == 0:
        raise CrossValidationError("no training labels")
    splits = int(min(MAX_SPLITS, counts.min()))
    if splits < 2:
        raise CrossValidationError(
            f"{CV_MSG} by setting n_splits=2 or more, got n_splits={splits}."
        )
    return splits


def stratified_folds(labels, splits: int, rng: np.random.Generator) -> np.ndarray:
    """Fold id per sample: each class is shuffled, then dealt round-robin."""
    labels = np.asarray(labels, dtype=np.int64)
    fold = np.empty(labels.size, dtype=np.int64)
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        fold[rng.permutation(members)] = np.arange(members.size) % splits
    return fold


def _mix64(z: int) -> int:
    # splitmix64 finalizer
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def cell_seed(master_seed: int, *names: str) -> int:
    """64-bit seed for one grid cell.

    Each name is hashed with BLAKE2b (8-byte digest) and folded into the
    running state with the splitmix64 finalizer, starting from the master seed.
    """
    state = _mix64(master_seed & MASK64)
    for name in names:
        h = int.from_bytes(hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest(), "little")
        state = _mix64(state ^ h)
    return state


def _score_folds(X, y, fold, splits, classifier, n_classes, record):
    prf = []
    for f in range(splits):
        test = fold == f
        pred = classifier.fit_predict(X[~test], y[~test], X[test], n_classes)
        cm = confusion_matrix(y[test], pred, n_classes)
        record.gmean_folds.append(gmean(cm))
        prf.append(macro_prf(cm))
    record.precision_macro, record.recall_macro, record.f1_macro = (float(v) for v in np.mean(prf, axis=0))


def run_experiment(dataset: Dataset, resampler: ResamplerSpec, classifier: ClassifierSpec,
                   seed: int, name: str = "dataset", split_first: bool = False) -> ExperimentRecord:
    """One (dataset, resampler, classifier) cell. Failures are recorded, never raised."""
    record = ExperimentRecord(name, str(resampler), str(classifier), seed, split_first=split_first)
    rng = np.random.Generator(np.random.PCG64(seed))
    if split_first:
        return _run_split_first(dataset, resampler, classifier, rng, record)

    outcome = resample(resampler, dataset, rng)
    record.resample_seconds = outcome.seconds
    if not outcome.ok:
        record.status, record.message = "failed", f"[{outcome.stage}] {outcome.message}"
        return record
    data = outcome.dataset
    try:
        splits = n_splits(data.labels)
    except CrossValidationError as exc:
        record.status, record.message = "failed", f"[cv] {exc}"
        return record
    fold = stratified_folds(data.labels, splits, rng)
    _score_folds(data.features, data.labels, fold, splits, classifier, data.n_classes, record)
    return record


def _run_split_first(dataset, resampler, classifier, rng, record):
    try:
        splits = n_splits(dataset.labels)
    except CrossValidationError as exc:
        record.status, record.message = "failed", f"[cv] {exc}"
        return record
    fold = stratified_folds(dataset.labels, splits, rng)
    X, y, c = dataset.features, dataset.labels, dataset.n_classes
    prf = []
    for f in range(splits):
        test = fold == f
        train = dataset.with_rows(X[~test], y[~test])
        outcome = resample(resampler, train, rng)
        record.resample_seconds += outcome.seconds
        if not outcome.ok:
            record.status, record.message = "failed", f"[{outcome.stage}] {outcome.message}"
            record.gmean_folds.clear()
            return record
        tr = outcome.dataset
        pred = classifier.fit_predict(tr.features, tr.labels, X[test], c)
        cm = confusion_matrix(y[test], pred, c)
        record.gmean_folds.append(gmean(cm))
        prf.append(macro_prf(cm))
    record.precision_macro, record.recall_macro, record.f1_macro = (float(v) for v in np.mean(prf, axis=0))
    return record


def run_grid(datasets: dict[str, Dataset], resamplers: list[ResamplerSpec],
             classifiers: list[ClassifierSpec], master_seed: int, jobs: int | None = 1,
             split_first: bool = False) -> list[ExperimentRecord]:
    """Every dataset x resampler x classifier cell, in that nesting order.

    ``jobs`` > 1 (or None for the executor default) runs cells on a thread pool;
    each cell seeds its own generator, so results do not depend on ``jobs``.
    """
    if not datasets or not resamplers or not classifiers:
        raise ValueError("grid needs at least one dataset, resampler and classifier")
    cells = [(name, ds, r, c) for name, ds in datasets.items() for r in resamplers for c in classifiers]

    def run(cell):
        name, ds, r, c = cell
        seed = cell_seed(master_seed, name, str(r), str(c))
        return run_experiment(ds, r, c, seed, name, split_first)

    if jobs == 1:
        return [run(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run, cells))
