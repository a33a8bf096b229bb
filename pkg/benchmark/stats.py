"""Friedman test with Nemenyi critical difference, ranks oriented so that 1 is best."""
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
from scipy.stats import chi2, rankdata

from predictions.config import NEMENYI_ALPHA

# Critical values q_alpha of the Nemenyi test at alpha = 0.05 (studentized range / sqrt(2)).
NEMENYI_Q_005: Dict[int, float] = {
    2: 1.960,
    3: 2.343,
    4: 2.569,
    5: 2.728,
    6: 2.850,
    7: 2.949,
    8: 3.031,
    9: 3.102,
    10: 3.164,
}


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    p_value: float
    ranks: np.ndarray
    average_ranks: np.ndarray


def row_ranks(values) -> np.ndarray:
    """Per-row midranks with rank 1 for the highest value."""
    values = np.asarray(values, dtype=np.float64)
    return rankdata(-values, axis=1)


def friedman_test(values) -> FriedmanResult:
    """
    Friedman chi-square statistic over an N datasets x k methods matrix (higher
    is better), without tie correction; p-value from chi-square with k - 1 dof.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"values must be an N x k matrix, got shape {values.shape}")
    n_datasets, k = values.shape
    if n_datasets < 2 or k < 2:
        raise ValueError(f"Friedman test needs N >= 2 datasets and k >= 2 methods, got N={n_datasets}, k={k}")
    if not np.all(np.isfinite(values)):
        raise ValueError("values must be finite")

    ranks = row_ranks(values)
    average = ranks.mean(axis=0)
    statistic = 12.0 * n_datasets / (k * (k + 1)) * (np.sum(average ** 2) - k * (k + 1) ** 2 / 4.0)
    statistic = max(float(statistic), 0.0)
    p_value = float(chi2.sf(statistic, df=k - 1))
    return FriedmanResult(statistic=statistic, p_value=p_value, ranks=ranks, average_ranks=average)


def nemenyi_cd(k: int, n_datasets: int, alpha: float = NEMENYI_ALPHA) -> float:
    if alpha != NEMENYI_ALPHA:
        raise ValueError(f"only alpha = {NEMENYI_ALPHA} is tabulated, got {alpha}")
    if k not in NEMENYI_Q_005:
        raise ValueError(f"k must lie in [2, 10], got {k}")
    if n_datasets < 2:
        raise ValueError(f"N must be >= 2, got {n_datasets}")
    return NEMENYI_Q_005[k] * float(np.sqrt(k * (k + 1) / (6.0 * n_datasets)))


def cd_groups(methods: Sequence[str], average_ranks: Sequence[float], cd: float) -> List[List[str]]:
    """
    Maximal chains of methods, in rank order, whose rank spread stays below cd.
    Singletons are omitted; they are significantly different from every neighbour.
    """
    order = sorted(range(len(methods)), key=lambda i: (average_ranks[i], methods[i]))
    ranked = [(methods[i], float(average_ranks[i])) for i in order]
    groups: List[List[str]] = []
    last_end = -1
    for start in range(len(ranked)):
        end = start
        while end + 1 < len(ranked) and ranked[end + 1][1] - ranked[start][1] < cd:
            end += 1
        # a chain ending where the previous one ended is contained in it
        if end > start and end > last_end:
            groups.append([name for name, _ in ranked[start:end + 1]])
            last_end = end
    return groups
