"""Distance metrics, pairwise distance matrices and k-nearest-neighbor lists.

The full n x n matrix is always materialized, so memory grows as O(n^2);
that is the scaling limit of everything built on top of this module.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

METRIC_KINDS = ("euclidean", "cityblock", "minkowski", "cosine", "hamming")
DEFAULT_MINKOWSKI_P = 3.0


class NeighborError(ValueError):
    pass


@dataclass(frozen=True)
class DistanceMetric:
    kind: str = "euclidean"
    p: float = DEFAULT_MINKOWSKI_P

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric {self.kind!r}; choose from {', '.join(METRIC_KINDS)}")
        if self.kind == "minkowski" and not (np.isfinite(self.p) and self.p > 0):
            raise ValueError(f"minkowski needs finite p > 0, got {self.p}")

    @classmethod
    def parse(cls, text: "str | DistanceMetric") -> "DistanceMetric":
        """Accept ``euclidean``, ``minkowski`` or ``minkowski:2.5`` style names."""
        if isinstance(text, DistanceMetric):
            return text
        kind, _, p = text.strip().lower().partition(":")
        if p:
            if kind != "minkowski":
                raise ValueError(f"metric {kind!r} takes no parameter")
            return cls(kind, float(p))
        return cls(kind)

    def __str__(self):
        if self.kind == "minkowski":
            return f"minkowski:{self.p:g}"
        return self.kind


EUCLIDEAN = DistanceMetric("euclidean")


def _cosine(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    safe_a = np.where(na > 0, na, 1.0)
    safe_b = np.where(nb > 0, nb, 1.0)
    sim = (A / safe_a[:, None]) @ (B / safe_b[:, None]).T
    D = 1.0 - np.clip(sim, -1.0, 1.0)
    # zero vectors are maximally dissimilar to everything
    D[na == 0, :] = 1.0
    D[:, nb == 0] = 1.0
    return D


def _minkowski_int(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    # repeated multiplication beats the generic pow() inside cdist
    acc = np.zeros((A.shape[0], B.shape[0]))
    for j in range(A.shape[1]):
        t = np.abs(A[:, j, None] - B[None, :, j])
        term = t.copy()
        for _ in range(p - 1):
            term *= t
        acc += term
    return acc ** (1.0 / p)


def cross_distances(A, B, metric: DistanceMetric = EUCLIDEAN) -> np.ndarray:
    """Distances between every row of ``A`` and every row of ``B``."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    metric = DistanceMetric.parse(metric)
    if metric.kind == "cosine":
        D = _cosine(A, B)
    elif metric.kind == "minkowski" and float(metric.p).is_integer() and metric.p <= 8:
        D = _minkowski_int(A, B, int(metric.p))
    elif metric.kind == "minkowski":
        D = cdist(A, B, "minkowski", p=metric.p)
    else:
        D = cdist(A, B, metric.kind)
    return np.maximum(D, 0.0, out=D)


def pairwise_distances(X, metric: DistanceMetric = EUCLIDEAN) -> np.ndarray:
    """Symmetric n x n distance matrix with an exact zero diagonal."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a non-empty 2-D array")
    metric = DistanceMetric.parse(metric)
    D = cross_distances(X, X, metric)
    if metric.kind == "cosine":
        # the matmul path can differ in the last bit between (i, j) and (j, i)
        D = np.maximum(D, D.T)
    np.fill_diagonal(D, 0.0)
    return D


@dataclass(frozen=True)
class NeighborIndex:
    """Distance matrix plus, per row, the k nearest other points in order."""

    distances: np.ndarray
    idxs: np.ndarray
    k: int
    requested_k: int

    @property
    def clamped(self) -> bool:
        return self.k != self.requested_k

    def neighbor_distances(self) -> np.ndarray:
        return np.take_along_axis(self.distances, self.idxs, axis=1)


def knn_indices(D, k: int, _scratch: bool = False) -> NeighborIndex:
    """Indices of the ``k`` nearest neighbors of each row, excluding the row itself.

    Ties in distance go to the lower index. ``k`` larger than n - 1 is clamped
    with a warning.
    """
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if n < 2:
        raise NeighborError("no neighbors available: need at least 2 points")
    k_eff = min(k, n - 1)
    if k_eff != k:
        warnings.warn(f"k={k} exceeds n-1={n - 1}; clamped to {k_eff}", stacklevel=2)
    # _scratch: D is private to the caller, so mask its diagonal in place
    masked = D if _scratch else D.copy()
    diag = D.diagonal().copy()
    np.fill_diagonal(masked, np.inf)
    idxs = _smallest_k(masked, k_eff)
    if _scratch:
        np.fill_diagonal(D, diag)
    return NeighborIndex(D, idxs, k_eff, k)


def _smallest_k(M: np.ndarray, k: int) -> np.ndarray:
    """Column indices of the k smallest entries per row, ordered by (value, index).

    Equivalent to a stable full argsort truncated to k columns, but only
    partitions each row.
    """
    n, m = M.shape
    if k == m:
        return np.argsort(M, axis=1, kind="stable")
    if np.unique(M[0]).size * 8 <= m:
        # few distinct values (e.g. hamming on low-dimensional data): a stable
        # sort is then far cheaper than partitioning
        return np.argsort(M, axis=1, kind="stable")[:, :k]
    kth = np.partition(M, k - 1, axis=1)[:, k - 1 : k]
    chosen = M <= kth
    crowded = np.flatnonzero(chosen.sum(axis=1) > k)
    if crowded.size > n // 4:
        return np.argsort(M, axis=1, kind="stable")[:, :k]
    if crowded.size:
        # ties at the boundary: keep only the lowest-index ones
        less = M[crowded] < kth[crowded]
        eq = chosen[crowded] & ~less
        need = k - less.sum(axis=1, keepdims=True)
        chosen[crowded] = less | (eq & (np.cumsum(eq, axis=1) <= need))
    cols = (np.flatnonzero(chosen) % m).reshape(n, k)  # ascending column index per row
    vals = np.take_along_axis(M, cols, axis=1)
    order = np.argsort(vals, axis=1, kind="stable")
    return np.take_along_axis(cols, order, axis=1)


def neighbor_index(X, k: int, metric: DistanceMetric = EUCLIDEAN) -> NeighborIndex:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return knn_indices(pairwise_distances(X, metric), k, _scratch=True)
