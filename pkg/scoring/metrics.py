"""
Scoring and behavior descriptor functions.

Both objectives are minimized: accuracy is carried as 1 - ROC AUC and cost as
inference time in seconds.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import TYPE_CHECKING, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from predictions.models import ModelRepo

if TYPE_CHECKING:
    from ensembles.ensemble import Ensemble, EvaluatedEnsemble


@dataclass(frozen=True)
class ObjectivePoint:
    accuracy_loss: float
    inference_time_s: float

    def __post_init__(self):
        if not (np.isfinite(self.accuracy_loss) and np.isfinite(self.inference_time_s)):
            raise ValueError(f"objective values must be finite, got {self}")
        if not 0.0 <= self.accuracy_loss <= 1.0:
            raise ValueError(f"accuracy_loss must lie in [0, 1], got {self.accuracy_loss}")

    def as_tuple(self) -> Tuple[float, float]:
        return (self.accuracy_loss, self.inference_time_s)


@dataclass(frozen=True)
class NormalizationBounds:
    loss_min: float
    loss_max: float
    time_min: float
    time_max: float

    def __post_init__(self):
        if self.loss_min > self.loss_max or self.time_min > self.time_max:
            raise ValueError(f"bounds must satisfy min <= max, got {self}")

    @classmethod
    def from_points(cls, points: Sequence[ObjectivePoint]) -> "NormalizationBounds":
        if not points:
            raise ValueError("cannot derive bounds from an empty point set")
        values = np.array([p.as_tuple() for p in points])
        return cls(
            loss_min=float(values[:, 0].min()),
            loss_max=float(values[:, 0].max()),
            time_min=float(values[:, 1].min()),
            time_max=float(values[:, 1].max()),
        )


def roc_auc_binary(scores, labels) -> float:
    """
    Area under the ROC curve via midranks (Mann-Whitney U / (n_pos * n_neg)).
    Ties between a positive and a negative count one half.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError(f"scores and labels must be equal-length vectors, got {scores.shape} and {labels.shape}")
    if np.isnan(scores).any():
        raise ValueError("scores contain NaN")
    positives = labels == 1
    n_pos = int(positives.sum())
    n_neg = int(labels.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC AUC needs both classes to be present")

    ranks = rankdata(scores)
    u_statistic = ranks[positives].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_statistic / (n_pos * n_neg))


def roc_auc_multiclass(probs, labels) -> float:
    """Macro average of one-vs-rest AUCs, column k scoring class k."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if probs.ndim != 2 or probs.shape[1] < 2:
        raise ValueError(f"probs must be an n x K matrix with K >= 2, got shape {probs.shape}")
    n_classes = probs.shape[1]
    if n_classes == 2:
        return roc_auc_binary(probs[:, 1], (labels == 1).astype(np.int64))

    aucs = []
    for k in range(n_classes):
        is_k = labels == k
        if not is_k.any():
            raise ValueError(f"class {k} is absent from labels")
        aucs.append(roc_auc_binary(probs[:, k], is_k.astype(np.int64)))
    return float(np.mean(aucs))


def ensemble_inference_time(ensemble: "Ensemble", repo: ModelRepo) -> float:
    # A repeated member is predicted once, so it is paid once.
    return float(repo.inference_time_s[list(ensemble.members)].sum())


def ensemble_size(ensemble: "Ensemble") -> int:
    return len(ensemble.members)


def prediction_diversity(ensemble: "Ensemble", repo: ModelRepo) -> float:
    """Mean pairwise argmax disagreement rate on validation data; 0 for singletons."""
    members = ensemble.members
    if len(members) < 2:
        return 0.0
    hard = repo.val_argmax
    rates = [np.mean(hard[i] != hard[j]) for i, j in combinations(members, 2)]
    return float(np.mean(rates))


def config_similarity(ensemble: "Ensemble", repo: ModelRepo) -> float:
    """Mean pairwise cosine similarity of config vectors, mapped from [-1, 1] onto [0, 1]."""
    if repo.config_features is None:
        raise ValueError(f"{repo.dataset_id}: config similarity needs config features")
    members = ensemble.members
    if len(members) < 2:
        return 1.0

    vectors = repo.config_features[list(members)]
    norms = np.linalg.norm(vectors, axis=1)
    # zero vectors have no direction; they count as orthogonal to everything
    safe = np.where(norms > 0, norms, 1.0)
    unit = vectors / safe[:, None]
    cosines = [float(np.dot(unit[a], unit[b])) for a, b in combinations(range(len(members)), 2)]
    similarity = (np.mean(cosines) + 1.0) / 2.0
    return float(np.clip(similarity, 0.0, 1.0))


def objective_point(evaluated: "EvaluatedEnsemble") -> ObjectivePoint:
    return ObjectivePoint(accuracy_loss=1.0 - evaluated.test_auc, inference_time_s=evaluated.inference_time_s)


def minmax_normalize(points: Sequence[ObjectivePoint], bounds: NormalizationBounds) -> np.ndarray:
    """
    Map points into [0, 1]^2 per objective; a degenerate objective (max == min)
    maps every point to 0. Returns an array of shape (n, 2).
    """
    values = np.array([p.as_tuple() for p in points], dtype=np.float64).reshape(-1, 2)
    normalized = np.zeros_like(values)
    for dim, (low, high) in enumerate(
        ((bounds.loss_min, bounds.loss_max), (bounds.time_min, bounds.time_max))
    ):
        if high > low:
            normalized[:, dim] = (values[:, dim] - low) / (high - low)
    return np.clip(normalized, 0.0, 1.0)
