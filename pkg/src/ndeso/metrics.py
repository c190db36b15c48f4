"""Confusion matrix, multiclass G-mean and macro precision/recall/F1."""

from __future__ import annotations

import numpy as np


def confusion_matrix(actual, predicted, n_classes: int) -> np.ndarray:
    """Counts with rows = actual class id, columns = predicted class id."""
    actual = np.asarray(actual, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if actual.shape != predicted.shape:
        raise ValueError(f"length mismatch: {actual.shape[0]} actual vs {predicted.shape[0]} predicted")
    if actual.size and (min(actual.min(), predicted.min()) < 0
                        or max(actual.max(), predicted.max()) >= n_classes):
        raise ValueError("class id out of range")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (actual, predicted), 1)
    return cm


def per_class_recall(cm) -> np.ndarray:
    """Recall per class; NaN for classes with no actual samples."""
    cm = np.asarray(cm)
    support = cm.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(support > 0, np.diag(cm) / np.where(support > 0, support, 1), np.nan)


def gmean(cm) -> float:
    """Geometric mean of per-class recall over the classes present in ``cm``'s rows.

    For two classes this is sqrt(TPR * TNR). Any zero recall gives 0.
    """
    cm = np.asarray(cm)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] == 0 or cm.sum() == 0:
        raise ValueError("gmean needs a non-empty square confusion matrix")
    rec = per_class_recall(cm)
    rec = rec[~np.isnan(rec)]
    if np.any(rec == 0):
        return 0.0
    return float(np.prod(rec) ** (1.0 / rec.size))


def macro_prf(cm) -> tuple[float, float, float]:
    """Unweighted class means of precision, recall and F1.

    Undefined ratios (empty predicted column, no actual samples, P = R = 0)
    count as 0.
    """
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    pred = cm.sum(axis=0)
    act = cm.sum(axis=1)
    precision = np.divide(tp, pred, out=np.zeros_like(tp), where=pred > 0)
    recall = np.divide(tp, act, out=np.zeros_like(tp), where=act > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return float(precision.mean()), float(recall.mean()), float(f1.mean())
