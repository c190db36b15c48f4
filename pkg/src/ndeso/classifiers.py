"""The two built-in classifiers used by the experiment harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import EUCLIDEAN, DistanceMetric, _smallest_k, cross_distances


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "knn"
    k: int = 5
    max_depth: int | None = None
    min_leaf: int = 1
    metric: DistanceMetric = EUCLIDEAN

    def __post_init__(self):
        if self.kind not in ("knn", "decision_tree"):
            raise ValueError(f"unknown classifier {self.kind!r}")
        if self.k < 1 or self.min_leaf < 1 or (self.max_depth is not None and self.max_depth < 1):
            raise ValueError("classifier parameters must be positive")

    @classmethod
    def parse(cls, text: str) -> "ClassifierSpec":
        """``knn``, ``knn:7``, ``tree``, ``tree:4`` (max depth)."""
        name, _, arg = text.strip().lower().partition(":")
        if name == "knn":
            return cls("knn", k=int(arg) if arg else 5)
        if name in ("tree", "decision_tree"):
            return cls("decision_tree", max_depth=int(arg) if arg else None)
        raise ValueError(f"unknown classifier {text!r}; use knn[:k] or tree[:max_depth]")

    def __str__(self):
        if self.kind == "knn":
            return "knn" if self.k == 5 else f"knn:{self.k}"
        return "tree" if self.max_depth is None else f"tree:{self.max_depth}"

    def fit_predict(self, X_train, y_train, X_test, n_classes: int) -> np.ndarray:
        if self.kind == "knn":
            return knn_classify(X_train, y_train, X_test, self.k, self.metric, n_classes)
        tree = tree_fit(X_train, y_train, self.max_depth, self.min_leaf, n_classes)
        return tree_predict(tree, X_test)


def knn_classify(X_train, y_train, X_test, k: int = 5, metric: DistanceMetric = EUCLIDEAN,
                 n_classes: int | None = None) -> np.ndarray:
    """Majority vote of the k nearest training points.

    Neighbors are ordered by distance then training index; vote ties go to the
    smallest class id.
    """
    y_train = np.asarray(y_train, dtype=np.int64)
    if y_train.size == 0:
        raise ValueError("empty training set")
    c = int(y_train.max()) + 1 if n_classes is None else n_classes
    k = min(k, y_train.size)
    D = cross_distances(X_test, X_train, metric)
    nn = _smallest_k(D, k)
    votes = np.zeros((nn.shape[0], c), dtype=np.int64)
    np.add.at(votes, (np.repeat(np.arange(nn.shape[0]), k), y_train[nn].ravel()), 1)
    return votes.argmax(axis=1)


@dataclass
class Node:
    prediction: int
    feature: int = -1
    threshold: float = 0.0
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


def _gini(counts: np.ndarray) -> np.ndarray:
    total = counts.sum(axis=-1)
    p = counts / np.where(total > 0, total, 1)[..., None]
    return 1.0 - (p**2).sum(axis=-1)


def _best_split(X, y, n_classes, min_leaf):
    """Lowest weighted Gini over all features and midpoints; first found wins ties."""
    n = y.size
    best = None
    best_score = np.inf
    onehot = np.eye(n_classes, dtype=np.int64)[y]
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = left[-1] + onehot[order[-1]] - left
        n_left = np.arange(1, n)
        valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not valid.any():
            continue
        score = (n_left * _gini(left) + (n - n_left) * _gini(right)) / n
        score = np.where(valid, score, np.inf)
        pos = int(np.argmin(score))
        if score[pos] < best_score - 1e-12:
            best_score = score[pos]
            best = (j, 0.5 * (xs[pos] + xs[pos + 1]))
    return best


def tree_fit(X, y, max_depth: int | None = None, min_leaf: int = 1,
             n_classes: int | None = None) -> Node:
    """CART-style tree: axis-aligned midpoint splits chosen by Gini impurity.

    Ties go to the lowest feature index, then the lowest threshold. Impure
    nodes are split even when the best split has zero Gini gain (needed for
    XOR-like data). Leaves predict their majority class (smallest id on ties).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if y.size == 0:
        raise ValueError("empty training set")
    c = int(y.max()) + 1 if n_classes is None else n_classes

    def grow(idx, depth):
        counts = np.bincount(y[idx], minlength=c)
        node = Node(int(counts.argmax()))
        if counts.max() == idx.size or (max_depth is not None and depth >= max_depth):
            return node
        split = _best_split(X[idx], y[idx], c, min_leaf)
        if split is None:
            return node
        node.feature, node.threshold = split
        mask = X[idx, node.feature] <= node.threshold
        node.left = grow(idx[mask], depth + 1)
        node.right = grow(idx[~mask], depth + 1)
        return node

    return grow(np.arange(y.size), 0)


def tree_predict(tree: Node, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(X.shape[0], dtype=np.int64)
    stack = [(tree, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if node.is_leaf:
            out[idx] = node.prediction
            continue
        mask = X[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out
