import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from predictions.config import GES_ITERATIONS
from predictions.models import ModelRepo
from scoring.metrics import roc_auc_multiclass

from .ensemble import (
    BehaviorFn,
    EvaluatedEnsemble,
    combine_predictions,
    deduplicate,
    evaluate,
    single_best,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GesConfig:
    iterations: int = GES_ITERATIONS

    def __post_init__(self):
        # 0 is accepted and yields the single best model only
        if self.iterations < 0:
            raise ValueError(f"iterations must be nonnegative, got {self.iterations}")


def run_ges(repo: ModelRepo, config: GesConfig, behavior_fn: BehaviorFn = None) -> List[EvaluatedEnsemble]:
    """
    Greedy ensemble selection with replacement, recording the ensemble after
    every iteration. trajectory[0] is the single best model; each later entry
    adds the model whose addition maximizes validation ROC AUC (lowest index on ties).
    """
    current = single_best(repo)
    trajectory = [evaluate(current, repo, behavior_fn)]

    for step in range(config.iterations):
        candidates = [current.add(m) for m in range(repo.n_models)]
        scores = np.array([
            roc_auc_multiclass(combine_predictions(c, repo.val_predictions), repo.val_labels)
            for c in candidates
        ])
        chosen = int(np.argmax(scores))
        current = candidates[chosen]
        trajectory.append(evaluate(current, repo, behavior_fn))
        logger.debug(f"GES step {step + 1}: added model {chosen}, val AUC {scores[chosen]:.6f}")

    return trajectory


def ges_solution_set(trajectory: List[EvaluatedEnsemble]) -> List[EvaluatedEnsemble]:
    if not trajectory:
        raise ValueError("trajectory is empty")
    return deduplicate(trajectory)
