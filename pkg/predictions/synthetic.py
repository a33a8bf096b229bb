import logging
from pathlib import Path
from typing import List

import numpy as np
from scipy.special import softmax
from scipy.stats import norm

from .models import ModelRepo, SyntheticRepoConfig
from .storage import write_repo

logger = logging.getLogger(__name__)


def _separation(accuracy: np.ndarray) -> np.ndarray:
    # Logit margin of the true class that yields the target accuracy for two
    # classes with unit Gaussian logit noise; used as-is for K > 2.
    return np.sqrt(2.0) * norm.ppf(accuracy)


def _balanced_labels(rng: np.random.Generator, n_rows: int, n_classes: int) -> np.ndarray:
    return rng.permutation(np.arange(n_rows) % n_classes)


def _predictions(
    rng: np.random.Generator,
    labels: np.ndarray,
    strength: np.ndarray,
    correlation: float,
    n_classes: int,
) -> np.ndarray:
    n_models = strength.shape[0]
    onehot = np.eye(n_classes)[labels]
    shared = rng.normal(size=(labels.shape[0], n_classes))
    private = rng.normal(size=(n_models, labels.shape[0], n_classes))
    noise = np.sqrt(correlation) * shared[None, :, :] + np.sqrt(1.0 - correlation) * private
    logits = strength[:, None, None] * onehot[None, :, :] + noise
    return softmax(logits, axis=2)


def _inference_times(rng: np.random.Generator, config: SyntheticRepoConfig, accuracy: np.ndarray) -> np.ndarray:
    low, high = config.time_range_s
    drawn = np.sort(np.exp(rng.uniform(np.log(low), np.log(high), size=config.n_models)))

    # Assign the sorted draws by a latent that is rank-coupled to model quality;
    # the marginal stays log-uniform for any coupling.
    spread = accuracy.std()
    quality = (accuracy - accuracy.mean()) / spread if spread > 0 else np.zeros_like(accuracy)
    coupling = config.time_quality_coupling
    latent = coupling * quality + np.sqrt(1.0 - coupling ** 2) * rng.normal(size=config.n_models)

    times = np.empty(config.n_models)
    times[np.argsort(latent, kind="stable")] = drawn
    return times


def generate_synthetic(config: SyntheticRepoConfig) -> ModelRepo:
    """
    Build a desk-scale prediction repo as a pure function of config.

    Random draws happen in this fixed order from one generator seeded with
    config.seed: validation labels, test labels, accuracy assignment,
    validation noise, test noise, inference times, config features.
    """
    rng = np.random.default_rng(config.seed)
    n_models, n_classes = config.n_models, config.n_classes

    val_labels = _balanced_labels(rng, config.n_val, n_classes)
    test_labels = _balanced_labels(rng, config.n_test, n_classes)

    low, high = config.accuracy_range
    targets = np.linspace(low, high, n_models) if n_models > 1 else np.array([high])
    accuracy = targets[rng.permutation(n_models)]

    # Logit noise has unit variance for every correlation, so each model keeps
    # its target accuracy; correlation only sets how much noise models share.
    strength = _separation(accuracy)
    if config.correlation == 1.0:
        # fully shared noise: every model is the same model
        strength = np.full(n_models, strength.mean())

    val_predictions = _predictions(rng, val_labels, strength, config.correlation, n_classes)
    test_predictions = _predictions(rng, test_labels, strength, config.correlation, n_classes)
    inference_time_s = _inference_times(rng, config, accuracy)
    config_features = rng.normal(size=(n_models, config.config_dim))

    logger.debug(f"Generated synthetic repo {config.dataset_id} fold {config.fold_id} (seed {config.seed})")
    return ModelRepo(
        dataset_id=config.dataset_id,
        fold_id=config.fold_id,
        n_classes=n_classes,
        model_ids=[f"m{i:03d}" for i in range(n_models)],
        val_labels=val_labels,
        test_labels=test_labels,
        val_predictions=val_predictions,
        test_predictions=test_predictions,
        inference_time_s=inference_time_s,
        config_features=config_features,
    )


def generate_suite(out_dir, n_datasets: int, n_folds: int, seed: int, **repo_options) -> List[Path]:
    """
    Write n_datasets x n_folds synthetic repos as out_dir/<dataset>/fold_<k>/.
    Accuracy range and correlation are drawn per dataset from (seed, dataset);
    each fold gets its own generator seed derived from (seed, dataset, fold).
    """
    if n_datasets < 1 or n_folds < 1:
        raise ValueError(f"need at least one dataset and one fold, got {n_datasets} and {n_folds}")
    out_dir = Path(out_dir)
    manifests = []
    for dataset in range(n_datasets):
        dataset_id = f"synthetic-{dataset:03d}"
        dataset_rng = np.random.default_rng([seed, dataset])
        accuracy_range = (float(dataset_rng.uniform(0.6, 0.75)), float(dataset_rng.uniform(0.8, 0.95)))
        correlation = float(dataset_rng.uniform(0.2, 0.8))

        for fold in range(n_folds):
            fold_seed = int(np.random.SeedSequence([seed, dataset, fold]).generate_state(1)[0])
            config = SyntheticRepoConfig(
                accuracy_range=accuracy_range,
                correlation=correlation,
                seed=fold_seed,
                dataset_id=dataset_id,
                fold_id=fold,
                **repo_options,
            )
            manifests.append(write_repo(generate_synthetic(config), out_dir / dataset_id / f"fold_{fold}"))
        logger.info(f"Generated {dataset_id} with {n_folds} folds")
    return manifests
