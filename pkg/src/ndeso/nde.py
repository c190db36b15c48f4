"""Neighbor-based displacement of noisy points toward their class centroid.

A point is noisy when strictly more of its k nearest neighbors belong to other
classes than to its own. Noisy points, and by default their same-class
neighbors, are moved onto the segment through their class centroid so that
they end up at a distance from the centroid equal to their mean neighbor
distance. Everything (distances, neighbor lists, centroids) is computed once
on the input; moves never see one another.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import EUCLIDEAN, DistanceMetric, NeighborIndex, neighbor_index


@dataclass(frozen=True)
class DisplacementPlan:
    indices: np.ndarray  # sorted ids of points to move
    centroids: np.ndarray  # (n_classes, d), row = class id
    phi: np.ndarray  # mean neighbor distance, per point
    same: np.ndarray  # same-class neighbor count, per point
    diff: np.ndarray  # other-class neighbor count, per point
    k: int


def neighbor_votes(labels, idxs) -> tuple[np.ndarray, np.ndarray]:
    """(same, diff) counts of each point's neighbors relative to its own label."""
    labels = np.asarray(labels)
    idxs = np.asarray(idxs)
    same = (labels[idxs] == labels[:, None]).sum(axis=1)
    return same, idxs.shape[1] - same


def identify_displaceable(labels, nbrs: "NeighborIndex | np.ndarray",
                          augment_same_class_neighbors: bool = True) -> np.ndarray:
    """Sorted indices of points that should be displaced.

    A point qualifies when its other-class neighbors strictly outnumber its
    same-class ones. With ``augment_same_class_neighbors`` the same-class
    neighbors of every qualifying point are added as well.
    """
    labels = np.asarray(labels)
    idxs = nbrs.idxs if isinstance(nbrs, NeighborIndex) else np.asarray(nbrs)
    same, diff = neighbor_votes(labels, idxs)
    flagged = np.flatnonzero(diff > same)
    chosen = np.zeros(labels.shape[0], dtype=bool)
    chosen[flagged] = True
    if augment_same_class_neighbors and flagged.size:
        nb = idxs[flagged]
        chosen[nb[labels[nb] == labels[flagged][:, None]]] = True
    return np.flatnonzero(chosen)


def count_noisy(X, labels, k: int = 5, metric: DistanceMetric = EUCLIDEAN) -> int:
    """Number of points whose other-class neighbors outnumber same-class ones."""
    nbrs = neighbor_index(X, k, metric)
    same, diff = neighbor_votes(labels, nbrs.idxs)
    return int(np.count_nonzero(diff > same))


def class_centroids(X, labels, n_classes: int | None = None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    c = int(labels.max()) + 1 if n_classes is None else n_classes
    counts = np.bincount(labels, minlength=c)
    if np.any(counts == 0):
        raise ValueError("every class needs at least one member")
    return np.stack([X[labels == i].mean(axis=0) for i in range(c)])


def plan_displacement(X, labels, metric: DistanceMetric = EUCLIDEAN, k: int = 5,
                      augment_same_class_neighbors: bool = True) -> DisplacementPlan:
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    nbrs = neighbor_index(X, k, metric)
    same, diff = neighbor_votes(labels, nbrs.idxs)
    return DisplacementPlan(
        indices=identify_displaceable(labels, nbrs, augment_same_class_neighbors),
        centroids=class_centroids(X, labels),
        phi=nbrs.neighbor_distances().mean(axis=1),
        same=same,
        diff=diff,
        k=nbrs.k,
    )


def apply_plan(X, labels, plan: DisplacementPlan) -> np.ndarray:
    """New feature matrix with every planned point moved; others copied bit for bit.

    The direction uses the Euclidean norm of (centroid - x). A planned point
    sitting exactly on its centroid is left in place. Large neighbor distances
    can put the new position farther from the centroid than the old one.
    """
    X = np.asarray(X, dtype=np.float64)
    out = X.copy()
    i = plan.indices
    if i.size == 0:
        return out
    r = plan.centroids[np.asarray(labels)[i]]
    delta = r - X[i]
    s = np.linalg.norm(delta, axis=1)
    move = s > 0
    i, r, delta, s = i[move], r[move], delta[move], s[move]
    unit = delta / s[:, None]
    out[i] = r - unit * plan.phi[i][:, None]
    return out


def displace(X, labels, metric: DistanceMetric = EUCLIDEAN, k: int = 5,
             augment_same_class_neighbors: bool = True) -> np.ndarray:
    """One displacement pass over ``X``; ``k`` is clamped to n - 1."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] < 2:
        return X.copy()
    plan = plan_displacement(X, labels, metric, k, augment_same_class_neighbors)
    return apply_plan(X, labels, plan)
