import json
import logging
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from .config import MANIFEST_FILENAME
from .models import ModelRepo, RepoValidationError

logger = logging.getLogger(__name__)

# 17 significant digits round-trip every float64 exactly
FLOAT_FORMAT = "%.17g"


def _read_matrix(path: Path, n_classes: int) -> np.ndarray:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise RepoValidationError(f"{path}: cannot parse predictions ({e})") from e
    expected = [f"c{k}" for k in range(n_classes)]
    if list(frame.columns) != expected:
        raise RepoValidationError(f"{path}: expected header {','.join(expected)}, got {','.join(frame.columns)}")
    try:
        return frame.to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise RepoValidationError(f"{path}: predictions must be numeric ({e})") from e


def _read_labels(path: Path) -> np.ndarray:
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise RepoValidationError(f"{path}: cannot parse labels ({e})") from e
    if list(frame.columns) != ["label"]:
        raise RepoValidationError(f"{path}: expected header 'label', got {','.join(frame.columns)}")
    if not pd.api.types.is_integer_dtype(frame["label"]):
        raise RepoValidationError(f"{path}: labels must be integer class indices")
    return frame["label"].to_numpy(dtype=np.int64)


def _resolve(base: Path, relative: str) -> Path:
    path = base / relative
    if not path.is_file():
        raise FileNotFoundError(f"Referenced data file not found: {path}")
    return path


def _as_list(value: Any) -> list:
    if not isinstance(value, list):
        raise TypeError(f"expected a list, got {type(value).__name__}")
    return value


def _field(entry: Any, name: str, cast, where: str):
    """entry[name] converted by cast; anything missing or malformed raises RepoValidationError."""
    if not isinstance(entry, dict):
        raise RepoValidationError(f"{where}: expected a JSON object, got {type(entry).__name__}")
    if name not in entry:
        raise RepoValidationError(f"{where}: missing field '{name}'")
    try:
        return cast(entry[name])
    except (TypeError, ValueError) as e:
        raise RepoValidationError(f"{where}: malformed field '{name}' ({e})") from e


def load_repo(manifest_path) -> ModelRepo:
    """
    Load one dataset-fold from a JSON manifest and the CSV files it references.
    Paths inside the manifest are relative to the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise FileNotFoundError(f"Manifest not found: {manifest_path}")

    try:
        manifest: Dict[str, Any] = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as e:
        raise RepoValidationError(f"{manifest_path}: invalid JSON ({e})") from e

    base = manifest_path.parent
    where = str(manifest_path)
    dataset_id = _field(manifest, "dataset_id", str, where)
    fold_id = _field(manifest, "fold_id", int, where)
    n_classes = _field(manifest, "n_classes", int, where)
    models: List[Dict[str, Any]] = _field(manifest, "models", _as_list, where)
    val_labels = _read_labels(_resolve(base, _field(manifest, "val_labels", str, where)))
    test_labels = _read_labels(_resolve(base, _field(manifest, "test_labels", str, where)))

    if not models:
        raise RepoValidationError(f"{manifest_path}: manifest lists no models")

    val_predictions, test_predictions, times = [], [], []
    for index, model in enumerate(models):
        model_where = f"{manifest_path}: model {index}"
        times.append(_field(model, "inference_time_s", float, model_where))
        for split, labels, target in (
            ("val", val_labels, val_predictions),
            ("test", test_labels, test_predictions),
        ):
            relative = _field(model, f"{split}_predictions", str, model_where)
            matrix = _read_matrix(_resolve(base, relative), n_classes)
            if matrix.shape != (labels.shape[0], n_classes):
                raise RepoValidationError(
                    f"{model_where}: {split} predictions have shape {matrix.shape}, "
                    f"expected {(labels.shape[0], n_classes)}"
                )
            target.append(matrix)

    has_features = [m.get("config_features") is not None for m in models]
    if any(has_features) and not all(has_features):
        raise RepoValidationError(f"{manifest_path}: config_features given for some models only")
    config_features = None
    if all(has_features):
        features = [
            _field(m, "config_features", _as_list, f"{manifest_path}: model {i}") for i, m in enumerate(models)
        ]
        lengths = {len(f) for f in features}
        if len(lengths) != 1:
            raise RepoValidationError(f"{manifest_path}: config_features have unequal lengths {sorted(lengths)}")
        try:
            config_features = np.array(features, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise RepoValidationError(f"{manifest_path}: config_features must be numeric ({e})") from e

    repo = ModelRepo(
        dataset_id=dataset_id,
        fold_id=fold_id,
        n_classes=n_classes,
        model_ids=[str(m.get("model_id", f"m{i:03d}")) for i, m in enumerate(models)],
        val_labels=val_labels,
        test_labels=test_labels,
        val_predictions=np.stack(val_predictions),
        test_predictions=np.stack(test_predictions),
        inference_time_s=np.array(times),
        config_features=config_features,
    )
    logger.debug(f"Loaded {repo.dataset_id} fold {repo.fold_id} with {repo.n_models} models from {manifest_path}")
    return repo


def write_repo(repo: ModelRepo, directory) -> Path:
    """Write a repo as manifest.json plus CSV matrices into directory; returns the manifest path."""
    directory = Path(directory)
    (directory / "predictions").mkdir(parents=True, exist_ok=True)
    columns = [f"c{k}" for k in range(repo.n_classes)]

    for split, labels in (("val", repo.val_labels), ("test", repo.test_labels)):
        pd.DataFrame({"label": labels}).to_csv(directory / f"{split}_labels.csv", index=False)

    models = []
    for index, model_id in enumerate(repo.model_ids):
        entry: Dict[str, Any] = {
            "model_id": model_id,
            "inference_time_s": float(repo.inference_time_s[index]),
        }
        if repo.config_features is not None:
            entry["config_features"] = [float(v) for v in repo.config_features[index]]
        for split, predictions in (("val", repo.val_predictions), ("test", repo.test_predictions)):
            relative = f"predictions/model_{index:04d}_{split}.csv"
            pd.DataFrame(predictions[index], columns=columns).to_csv(
                directory / relative, index=False, float_format=FLOAT_FORMAT
            )
            entry[f"{split}_predictions"] = relative
        models.append(entry)

    manifest = {
        "dataset_id": repo.dataset_id,
        "fold_id": repo.fold_id,
        "n_classes": repo.n_classes,
        "models": models,
        "val_labels": "val_labels.csv",
        "test_labels": "test_labels.csv",
    }
    manifest_path = directory / MANIFEST_FILENAME
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return manifest_path


def discover_manifests(root) -> List[Path]:
    """All manifests below root, sorted by path."""
    root = Path(root)
    if root.is_file():
        return [root]
    return sorted(root.rglob(MANIFEST_FILENAME))
