"""Shared fixtures: a hand-made three-model repo and a synthetic repo factory."""

import numpy as np
import pytest

from predictions.models import ModelRepo, SyntheticRepoConfig
from predictions.synthetic import generate_synthetic


def binary_matrix(positive_scores) -> np.ndarray:
    scores = np.asarray(positive_scores, dtype=np.float64)
    return np.column_stack([1.0 - scores, scores])


@pytest.fixture
def tiny_repo() -> ModelRepo:
    """
    Validation AUCs: model 0 = 0.75, model 1 = 1.0, model 2 = 0.5 (constant scores).
    Inference times 0.1, 0.5 and 0.01 seconds.
    """
    labels = np.array([0, 0, 1, 1])
    scores = [
        [0.1, 0.4, 0.35, 0.8],
        [0.2, 0.3, 0.6, 0.7],
        [0.5, 0.5, 0.5, 0.5],
    ]
    predictions = np.stack([binary_matrix(s) for s in scores])
    return ModelRepo(
        dataset_id="tiny",
        fold_id=0,
        n_classes=2,
        model_ids=["a", "b", "c"],
        val_labels=labels,
        test_labels=labels,
        val_predictions=predictions,
        test_predictions=predictions,
        inference_time_s=np.array([0.1, 0.5, 0.01]),
        config_features=np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
    )


@pytest.fixture
def make_repo():
    """Factory for small synthetic repos; keyword arguments override SyntheticRepoConfig."""

    def factory(**overrides) -> ModelRepo:
        options = {"n_models": 10, "n_val": 120, "n_test": 120}
        options.update(overrides)
        return generate_synthetic(SyntheticRepoConfig(**options))

    return factory
