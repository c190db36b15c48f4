"""Mean ranks, Friedman test and Nemenyi critical difference.

Scores are "higher is better": rank 1 goes to the best method on a dataset,
ties share the average of the ranks they span.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2 as chi2_dist
from scipy.stats import rankdata

MISSING_POLICIES = ("worst-rank", "drop-row")

# Two-tailed Nemenyi critical values: infinite-dof Studentized range quantile
# divided by sqrt(2), for k = 2..20 methods.
Q_ALPHA = {
    0.05: (1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219,
           3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544),
    0.10: (1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920, 2.978,
           3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319),
}


class MissingCellError(ValueError):
    pass


@dataclass
class ScoreTable:
    """N datasets x k methods; NaN marks a failed run."""

    scores: np.ndarray
    datasets: list[str]
    methods: list[str]

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        N, k = self.scores.shape
        if len(self.datasets) != N or len(self.methods) != k:
            raise ValueError("names do not match the score matrix shape")

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.scores).any())


@dataclass
class RankResult:
    methods: list[str]
    mean_ranks: np.ndarray
    chi2: float
    p_value: float
    cd: float
    alpha: float
    significant: np.ndarray
    n_datasets: int
    missing_policy: str
    dropped_rows: list[str] = field(default_factory=list)

    @property
    def reject_null(self) -> bool:
        return self.p_value < self.alpha


def resolve_missing(table: ScoreTable, policy: str = "worst-rank") -> tuple[ScoreTable, list[str]]:
    """Make the table complete.

    ``worst-rank`` scores a failed cell as -inf so it ranks last in its row
    (several failures in one row share the bottom ranks); ``drop-row`` removes
    every dataset with a failure. Returns the table and the dropped dataset names.
    """
    if policy not in MISSING_POLICIES:
        raise ValueError(f"unknown missing-cell policy {policy!r}")
    missing = np.isnan(table.scores)
    if not missing.any():
        return table, []
    if policy == "worst-rank":
        return ScoreTable(np.where(missing, -np.inf, table.scores), table.datasets, table.methods), []
    bad = missing.any(axis=1)
    kept = ScoreTable(table.scores[~bad], [d for d, b in zip(table.datasets, bad) if not b], table.methods)
    return kept, [d for d, b in zip(table.datasets, bad) if b]


def rank_rows(scores) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    if np.isnan(scores).any():
        raise MissingCellError("score table has missing cells; resolve them with a missing-cell policy first")
    return rankdata(-scores, method="average", axis=1)


def mean_ranks(table: "ScoreTable | np.ndarray") -> np.ndarray:
    scores = table.scores if isinstance(table, ScoreTable) else table
    return rank_rows(scores).mean(axis=0)


def friedman_from_ranks(ranks, n_datasets: int) -> tuple[float, float]:
    R = np.asarray(ranks, dtype=np.float64)
    k, N = R.size, n_datasets
    if k < 2 or N < 1:
        raise ValueError("Friedman test needs at least 2 methods and 1 dataset")
    stat = 12.0 * N / (k * (k + 1)) * (np.sum(R**2) - k * (k + 1) ** 2 / 4.0)
    stat = max(float(stat), 0.0)
    return stat, float(chi2_dist.sf(stat, k - 1))


def friedman(table: "ScoreTable | np.ndarray") -> tuple[float, float]:
    """Friedman chi-square on mean ranks and its chi-square(k - 1) p-value."""
    scores = table.scores if isinstance(table, ScoreTable) else np.asarray(table, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[1] < 2 or scores.shape[0] < 2:
        raise ValueError("Friedman test needs N >= 2 datasets and k >= 2 methods")
    return friedman_from_ranks(mean_ranks(scores), scores.shape[0])


def nemenyi_cd(k: int, n_datasets: int, alpha: float = 0.05) -> float:
    if alpha not in Q_ALPHA:
        raise ValueError(f"alpha must be one of {sorted(Q_ALPHA)}")
    if not 2 <= k <= 20:
        raise ValueError(f"critical values are tabulated for 2 <= k <= 20, got k={k}")
    if n_datasets < 1:
        raise ValueError("need at least one dataset")
    q = Q_ALPHA[alpha][k - 2]
    return q * np.sqrt(k * (k + 1) / (6.0 * n_datasets))


def significance_matrix(ranks, cd: float) -> np.ndarray:
    """``out[a, b]`` is True when mean ranks of a and b differ by at least ``cd``."""
    if not cd > 0:
        raise ValueError("CD must be positive")
    R = np.asarray(ranks, dtype=np.float64)
    sig = np.abs(R[:, None] - R[None, :]) >= cd
    np.fill_diagonal(sig, False)
    return sig


def cd_groups(ranks, cd: float) -> list[list[int]]:
    """Maximal runs of methods (in rank order) whose spread is below ``cd``.

    These are the bars of a critical-difference diagram; runs contained in a
    longer run are dropped, singletons are kept.
    """
    R = np.asarray(ranks, dtype=np.float64)
    order = list(np.argsort(R, kind="stable"))
    groups: list[list[int]] = []
    last_end = -1
    for start in range(len(order)):
        end = start
        while end + 1 < len(order) and R[order[end + 1]] - R[order[start]] < cd:
            end += 1
        if end > last_end:
            groups.append([int(i) for i in order[start:end + 1]])
            last_end = end
    return groups


def rank_analysis(table: ScoreTable, alpha: float = 0.05, policy: str = "worst-rank") -> RankResult:
    complete, dropped = resolve_missing(table, policy)
    N, k = complete.scores.shape
    if N < 2:
        raise ValueError(f"need at least 2 complete datasets, have {N}")
    R = mean_ranks(complete)
    stat, p = friedman_from_ranks(R, N)
    cd = nemenyi_cd(k, N, alpha)
    return RankResult(list(table.methods), R, stat, p, cd, alpha,
                      significance_matrix(R, cd), N, policy, dropped)
