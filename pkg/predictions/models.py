from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np

from .config import PROBABILITY_TOLERANCE


class RepoValidationError(ValueError):
    pass


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ModelRepo:
    """
    One dataset-fold of precomputed base model predictions.

    Prediction tensors are stacked per model: shape (n_models, n_rows, n_classes).
    Arrays are copied and made read-only on construction, so a repo can be shared
    between workers as is.
    """
    dataset_id: str
    fold_id: int
    n_classes: int
    model_ids: List[str]
    val_labels: np.ndarray
    test_labels: np.ndarray
    val_predictions: np.ndarray
    test_predictions: np.ndarray
    inference_time_s: np.ndarray
    config_features: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "model_ids", list(self.model_ids))
        object.__setattr__(self, "val_labels", _readonly(np.asarray(self.val_labels, dtype=np.int64)))
        object.__setattr__(self, "test_labels", _readonly(np.asarray(self.test_labels, dtype=np.int64)))
        object.__setattr__(self, "val_predictions", _readonly(np.asarray(self.val_predictions, dtype=np.float64)))
        object.__setattr__(self, "test_predictions", _readonly(np.asarray(self.test_predictions, dtype=np.float64)))
        object.__setattr__(self, "inference_time_s", _readonly(np.asarray(self.inference_time_s, dtype=np.float64)))
        if self.config_features is not None:
            object.__setattr__(self, "config_features", _readonly(np.asarray(self.config_features, dtype=np.float64)))
        self.validate()

    @property
    def n_models(self) -> int:
        return int(self.val_predictions.shape[0])

    @property
    def n_val(self) -> int:
        return int(self.val_labels.shape[0])

    @property
    def n_test(self) -> int:
        return int(self.test_labels.shape[0])

    @property
    def has_config_features(self) -> bool:
        return self.config_features is not None

    @cached_property
    def val_argmax(self) -> np.ndarray:
        """Per model hard predictions on validation data, shape (n_models, n_val)."""
        return np.argmax(self.val_predictions, axis=2)

    def validate(self):
        """Raise RepoValidationError if any repo invariant is violated."""
        if self.n_classes < 2:
            raise RepoValidationError(f"{self.dataset_id}: n_classes must be >= 2, got {self.n_classes}")
        if self.fold_id < 0:
            raise RepoValidationError(f"{self.dataset_id}: fold_id must be nonnegative, got {self.fold_id}")

        n_models = self.val_predictions.shape[0] if self.val_predictions.ndim == 3 else 0
        if n_models < 1:
            raise RepoValidationError(f"{self.dataset_id}: at least one model is required")
        if len(self.model_ids) != n_models:
            raise RepoValidationError(
                f"{self.dataset_id}: {len(self.model_ids)} model ids for {n_models} models"
            )
        if len(set(self.model_ids)) != n_models:
            duplicates = sorted({m for m in self.model_ids if self.model_ids.count(m) > 1})
            raise RepoValidationError(f"{self.dataset_id}: duplicate model ids {duplicates}")

        for split, labels, predictions in (
            ("val", self.val_labels, self.val_predictions),
            ("test", self.test_labels, self.test_predictions),
        ):
            self._validate_split(split, labels, predictions, n_models)

        times = self.inference_time_s
        if times.shape != (n_models,):
            raise RepoValidationError(
                f"{self.dataset_id}: expected {n_models} inference times, got shape {times.shape}"
            )
        bad = np.flatnonzero(~np.isfinite(times) | (times <= 0))
        if bad.size:
            raise RepoValidationError(
                f"{self.dataset_id}: model {int(bad[0])} has non-positive or non-finite "
                f"inference time {times[bad[0]]}"
            )

        if self.config_features is not None:
            features = self.config_features
            if features.ndim != 2 or features.shape[0] != n_models or features.shape[1] < 1:
                raise RepoValidationError(
                    f"{self.dataset_id}: config features must have shape ({n_models}, d>=1), "
                    f"got {features.shape}"
                )
            if not np.all(np.isfinite(features)):
                raise RepoValidationError(f"{self.dataset_id}: config features must be finite")

    def _validate_split(self, split: str, labels: np.ndarray, predictions: np.ndarray, n_models: int):
        if labels.ndim != 1 or labels.size == 0:
            raise RepoValidationError(f"{self.dataset_id}: {split} labels must be a non-empty vector")
        expected = (n_models, labels.shape[0], self.n_classes)
        if predictions.shape != expected:
            raise RepoValidationError(
                f"{self.dataset_id}: {split} predictions have shape {predictions.shape}, expected {expected}"
            )
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise RepoValidationError(
                f"{self.dataset_id}: {split} labels must lie in [0, {self.n_classes})"
            )
        if np.unique(labels).size < 2:
            raise RepoValidationError(f"{self.dataset_id}: {split} labels contain a single class")

        out_of_range = (predictions < 0) | (predictions > 1) | ~np.isfinite(predictions)
        if out_of_range.any():
            model, row, _ = np.argwhere(out_of_range)[0]
            raise RepoValidationError(
                f"{self.dataset_id}: {split} predictions of model {model} row {row} "
                f"contain a value outside [0, 1]"
            )
        row_error = np.abs(predictions.sum(axis=2) - 1.0)
        if (row_error > PROBABILITY_TOLERANCE).any():
            model, row = np.argwhere(row_error > PROBABILITY_TOLERANCE)[0]
            raise RepoValidationError(
                f"{self.dataset_id}: {split} predictions of model {model} row {row} "
                f"sum to {predictions[model, row].sum():.6f}"
            )


@dataclass(frozen=True)
class SyntheticRepoConfig:
    """Knobs of the synthetic prediction repo generator."""
    n_models: int = 20
    n_val: int = 300
    n_test: int = 300
    n_classes: int = 2
    accuracy_range: Tuple[float, float] = (0.65, 0.9)
    correlation: float = 0.5
    time_range_s: Tuple[float, float] = (1e-3, 1.0)
    seed: int = 0
    config_dim: int = 4
    time_quality_coupling: float = 0.0
    dataset_id: str = "synthetic"
    fold_id: int = 0

    def __post_init__(self):
        for name in ("n_models", "n_val", "n_test", "config_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.n_classes < 2:
            raise ValueError(f"n_classes must be >= 2, got {self.n_classes}")
        if min(self.n_val, self.n_test) < self.n_classes:
            raise ValueError("n_val and n_test must be at least n_classes so every class occurs")
        low, high = self.accuracy_range
        if not (0.5 < low <= high < 1.0):
            raise ValueError(f"accuracy_range must be ordered within (0.5, 1), got {self.accuracy_range}")
        if not 0.0 <= self.correlation <= 1.0:
            raise ValueError(f"correlation must lie in [0, 1], got {self.correlation}")
        t_low, t_high = self.time_range_s
        if not (0.0 < t_low <= t_high and np.isfinite(t_high)):
            raise ValueError(f"time_range_s must be ordered positive seconds, got {self.time_range_s}")
        if not -1.0 <= self.time_quality_coupling <= 1.0:
            raise ValueError(f"time_quality_coupling must lie in [-1, 1], got {self.time_quality_coupling}")
        if self.fold_id < 0:
            raise ValueError(f"fold_id must be nonnegative, got {self.fold_id}")
