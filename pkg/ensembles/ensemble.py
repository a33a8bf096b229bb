from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from predictions.models import ModelRepo
from scoring.metrics import (
    ensemble_inference_time,
    ensemble_size,
    prediction_diversity,
    roc_auc_multiclass,
)

BehaviorFn = Callable[["Ensemble", ModelRepo], Tuple[float, float]]


@dataclass(frozen=True, order=True)
class Ensemble:
    """
    Multiset of model indices; counts act as integer weights.

    Stored as (index, count) pairs sorted by index, so equal multisets compare,
    hash and order identically.
    """
    items: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError("an ensemble needs at least one member")
        indices = [index for index, _ in self.items]
        if indices != sorted(set(indices)):
            raise ValueError(f"ensemble items must be sorted by unique index, got {self.items}")
        for index, count in self.items:
            if index < 0 or count < 1:
                raise ValueError(f"invalid ensemble item ({index}, {count})")

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> "Ensemble":
        return cls(tuple(sorted((int(i), int(c)) for i, c in counts.items() if c > 0)))

    @classmethod
    def singleton(cls, index: int) -> "Ensemble":
        return cls(((int(index), 1),))

    @property
    def counts(self) -> Dict[int, int]:
        return dict(self.items)

    @property
    def members(self) -> Tuple[int, ...]:
        return tuple(index for index, _ in self.items)

    @property
    def total_count(self) -> int:
        return sum(count for _, count in self.items)

    def add(self, index: int) -> "Ensemble":
        counts = self.counts
        counts[index] = counts.get(index, 0) + 1
        return Ensemble.from_counts(counts)

    def check(self, n_models: int):
        if self.items[-1][0] >= n_models:
            raise ValueError(f"ensemble {self.key} references a model outside [0, {n_models})")

    @property
    def key(self) -> str:
        """Canonical index:count serialization, comma separated, sorted by index."""
        return ",".join(f"{index}:{count}" for index, count in self.items)

    def label(self, model_ids: Sequence[str]) -> str:
        """model_id:count pairs in index order, as written to report files."""
        return ",".join(f"{model_ids[index]}:{count}" for index, count in self.items)


@dataclass(frozen=True)
class EvaluatedEnsemble:
    ensemble: Ensemble
    val_auc: float
    test_auc: float
    inference_time_s: float
    size: int
    behavior: Tuple[float, float]


def combine_predictions(ensemble: Ensemble, predictions: np.ndarray) -> np.ndarray:
    """Count-weighted mean of member prediction matrices; predictions is (n_models, n, K)."""
    predictions = np.asarray(predictions)
    if predictions.ndim != 3:
        raise ValueError(f"predictions must be stacked as (n_models, n, K), got shape {predictions.shape}")
    ensemble.check(predictions.shape[0])
    members = list(ensemble.members)
    weights = np.array([count for _, count in ensemble.items], dtype=np.float64)
    weights /= weights.sum()
    return np.tensordot(weights, predictions[members], axes=(0, 0))


def default_behavior(ensemble: Ensemble, repo: ModelRepo) -> Tuple[float, float]:
    return (float(ensemble_size(ensemble)), prediction_diversity(ensemble, repo))


def evaluate(ensemble: Ensemble, repo: ModelRepo, behavior_fn: Optional[BehaviorFn] = None) -> EvaluatedEnsemble:
    behavior_fn = behavior_fn or default_behavior
    val_auc = roc_auc_multiclass(combine_predictions(ensemble, repo.val_predictions), repo.val_labels)
    test_auc = roc_auc_multiclass(combine_predictions(ensemble, repo.test_predictions), repo.test_labels)
    behavior = tuple(float(v) for v in behavior_fn(ensemble, repo))
    return EvaluatedEnsemble(
        ensemble=ensemble,
        val_auc=val_auc,
        test_auc=test_auc,
        inference_time_s=ensemble_inference_time(ensemble, repo),
        size=ensemble_size(ensemble),
        behavior=behavior,
    )


def model_val_aucs(repo: ModelRepo) -> np.ndarray:
    return np.array([roc_auc_multiclass(repo.val_predictions[m], repo.val_labels) for m in range(repo.n_models)])


def single_best(repo: ModelRepo) -> Ensemble:
    # np.argmax returns the first maximum, i.e. the lowest index on ties
    return Ensemble.singleton(int(np.argmax(model_val_aucs(repo))))


def deduplicate(evaluated: Iterable[EvaluatedEnsemble]) -> List[EvaluatedEnsemble]:
    """Drop repeated count-maps, keeping the first occurrence and the input order."""
    seen = set()
    unique = []
    for candidate in evaluated:
        if candidate.ensemble not in seen:
            seen.add(candidate.ensemble)
            unique.append(candidate)
    return unique
