"""
Population-based ensemble selection: QO-ES keeps the best ensembles by
validation ROC AUC, QDO-ES keeps one elite per behavior-space cell.

Random draws for one offspring are taken from the run's generator in this
order: two parent indices, one crossover coin per member of the parents'
union (ascending index), the mutation coin, then the mutation move and its
picks. Offspring of a batch are drawn sequentially before any is evaluated.
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from predictions.config import EVO_BATCH_SIZE, EVO_BUDGET, EVO_CAPACITY, EVO_MUTATION_PROB
from predictions.models import ModelRepo

from .archive import BehaviorArchive, BehaviorSpec
from .ensemble import (
    BehaviorFn,
    Ensemble,
    EvaluatedEnsemble,
    deduplicate,
    evaluate,
    model_val_aucs,
    single_best,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvoConfig:
    capacity: int = EVO_CAPACITY
    budget: int = EVO_BUDGET
    batch_size: int = EVO_BATCH_SIZE
    mutation_prob: float = EVO_MUTATION_PROB
    seed: int = 0

    def __post_init__(self):
        if self.capacity < 1 or self.batch_size < 1:
            raise ValueError(f"capacity and batch_size must be positive, got {self.capacity}, {self.batch_size}")
        if self.budget < 0:
            raise ValueError(f"budget must be nonnegative, got {self.budget}")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError(f"mutation_prob must lie in [0, 1], got {self.mutation_prob}")


def _increment(counts: dict, n_models: int, rng: np.random.Generator):
    index = int(rng.integers(n_models))
    counts[index] = counts.get(index, 0) + 1


def mutate(ensemble: Ensemble, n_models: int, rng: np.random.Generator) -> Ensemble:
    """
    One of three moves, chosen uniformly: increment a random model, decrement a
    random member, or move one count unit from a random member to a random
    non-member. Moves that cannot apply fall back to the increment.
    """
    counts = ensemble.counts
    members = list(ensemble.members)
    move = int(rng.integers(3))

    if move == 1 and not (len(members) == 1 and counts[members[0]] == 1):
        source = members[int(rng.integers(len(members)))]
        counts[source] -= 1
    elif move == 2 and len(members) < n_models:
        source = members[int(rng.integers(len(members)))]
        outsiders = [m for m in range(n_models) if m not in counts]
        target = outsiders[int(rng.integers(len(outsiders)))]
        counts[source] -= 1
        counts[target] = 1
    else:
        _increment(counts, n_models, rng)

    return Ensemble.from_counts(counts)


def crossover(a: Ensemble, b: Ensemble, rng: np.random.Generator) -> Ensemble:
    """Uniform crossover over the union of members; an empty child falls back to a."""
    counts_a, counts_b = a.counts, b.counts
    union = sorted(set(counts_a) | set(counts_b))
    from_a = rng.random(len(union)) < 0.5
    child = {
        index: (counts_a if take_a else counts_b).get(index, 0)
        for index, take_a in zip(union, from_a)
    }
    if not any(child.values()):
        return a
    return Ensemble.from_counts(child)


def _initial_population(repo: ModelRepo, capacity: int, behavior_fn: Optional[BehaviorFn]) -> List[EvaluatedEnsemble]:
    aucs = model_val_aucs(repo)
    # stable sort on -auc keeps the lower index first among ties
    order = np.argsort(-aucs, kind="stable")[:capacity]
    return [evaluate(Ensemble.singleton(int(m)), repo, behavior_fn) for m in order]


def _breed(parents: List[EvaluatedEnsemble], n_offspring: int, n_models: int,
           config: EvoConfig, rng: np.random.Generator) -> List[Ensemble]:
    offspring = []
    for _ in range(n_offspring):
        first, second = rng.integers(len(parents), size=2)
        child = crossover(parents[first].ensemble, parents[second].ensemble, rng)
        if rng.random() < config.mutation_prob:
            child = mutate(child, n_models, rng)
        offspring.append(child)
    return offspring


def _evolve(
    repo: ModelRepo,
    config: EvoConfig,
    behavior_fn: Optional[BehaviorFn],
    parents: Callable[[], List[EvaluatedEnsemble]],
    survive: Callable[[List[EvaluatedEnsemble]], None],
) -> int:
    rng = np.random.default_rng(config.seed)
    evaluations = 0
    generation = 0
    while evaluations < config.budget:
        n_offspring = min(config.batch_size, config.budget - evaluations)
        children = _breed(parents(), n_offspring, repo.n_models, config, rng)
        survive([evaluate(child, repo, behavior_fn) for child in children])
        evaluations += n_offspring
        generation += 1
    logger.debug(f"{repo.dataset_id} fold {repo.fold_id}: {generation} generations, {evaluations} evaluations")
    return evaluations


def _quality_order(candidate: EvaluatedEnsemble):
    return (-candidate.val_auc, candidate.inference_time_s, candidate.ensemble.items)


def run_qoes(repo: ModelRepo, config: EvoConfig, behavior_fn: Optional[BehaviorFn] = None) -> List[EvaluatedEnsemble]:
    """QO-ES: keep the top-capacity distinct ensembles by validation ROC AUC."""
    population = _initial_population(repo, config.capacity, behavior_fn)

    def survive(offspring: List[EvaluatedEnsemble]):
        pool = deduplicate(population + offspring)
        population[:] = sorted(pool, key=_quality_order)[:config.capacity]

    _evolve(repo, config, behavior_fn, lambda: population, survive)
    return list(population)


def run_qdoes(repo: ModelRepo, config: EvoConfig, spec: BehaviorSpec) -> List[EvaluatedEnsemble]:
    """QDO-ES: keep one elite per behavior cell; returns every elite."""
    archive = spec.new_archive(repo)
    return list(evolve_archive(repo, config, spec, archive).elites())


def evolve_archive(repo: ModelRepo, config: EvoConfig, spec: BehaviorSpec,
                   archive: BehaviorArchive) -> BehaviorArchive:
    for individual in _initial_population(repo, config.capacity, spec.describe):
        archive.insert(individual)

    def survive(offspring: List[EvaluatedEnsemble]):
        for child in offspring:
            archive.insert(child)

    _evolve(repo, config, spec.describe, archive.elites, survive)
    logger.debug(
        f"{repo.dataset_id} fold {repo.fold_id} {spec.variant.value}: "
        f"coverage {archive.coverage():.2f}, QD score {archive.qd_score():.4f}"
    )
    return archive


def solution_set(population: List[EvaluatedEnsemble], repo: ModelRepo,
                 behavior_fn: Optional[BehaviorFn] = None) -> List[EvaluatedEnsemble]:
    """Final population plus the single best model, without repeated count-maps."""
    return deduplicate(list(population) + [evaluate(single_best(repo), repo, behavior_fn)])
