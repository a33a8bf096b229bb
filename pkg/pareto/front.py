from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ensembles.ensemble import EvaluatedEnsemble
from scoring.metrics import NormalizationBounds, minmax_normalize, objective_point

from .hypervolume import REFERENCE_POINT, hypervolume_2d


@dataclass(frozen=True)
class FrontEntry:
    evaluated: EvaluatedEnsemble
    point: Tuple[float, float]


@dataclass(frozen=True)
class ParetoFront:
    """Mutually non-dominated entries, ascending by the first objective (both minimized)."""
    entries: List[FrontEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def points(self) -> np.ndarray:
        return np.array([entry.point for entry in self.entries], dtype=np.float64).reshape(-1, 2)

    def members(self) -> List[EvaluatedEnsemble]:
        return [entry.evaluated for entry in self.entries]


def pareto_front(candidates: Sequence[EvaluatedEnsemble], objectives) -> ParetoFront:
    """
    Non-dominated subset of candidates under objectives (an (n, 2) array,
    minimization). Equal objective vectors collapse onto the entry whose
    (index, count) items compare smaller, so {2} wins over {10}.
    """
    objectives = np.asarray(objectives, dtype=np.float64).reshape(-1, 2)
    if len(candidates) != objectives.shape[0]:
        raise ValueError(f"{len(candidates)} candidates but {objectives.shape[0]} objective vectors")
    if not np.all(np.isfinite(objectives)):
        raise ValueError("objective values must be finite")

    order = sorted(
        range(len(candidates)),
        key=lambda i: (objectives[i, 0], objectives[i, 1], candidates[i].ensemble.items),
    )
    entries = []
    best_second = np.inf
    # After sorting by the first objective, an entry is non-dominated iff its
    # second objective beats every entry before it.
    for i in order:
        if objectives[i, 1] < best_second:
            best_second = objectives[i, 1]
            entries.append(FrontEntry(candidates[i], (float(objectives[i, 0]), float(objectives[i, 1]))))
    return ParetoFront(entries)


def joint_bounds(solution_sets: Dict[str, List[EvaluatedEnsemble]]) -> NormalizationBounds:
    """Normalization bounds over the union of every method's candidates."""
    points = [objective_point(c) for candidates in solution_sets.values() for c in candidates]
    return NormalizationBounds.from_points(points)


def normalized_front(candidates: List[EvaluatedEnsemble], bounds: NormalizationBounds) -> ParetoFront:
    if not candidates:
        raise ValueError("cannot build a front from an empty solution set")
    normalized = minmax_normalize([objective_point(c) for c in candidates], bounds)
    return pareto_front(candidates, normalized)


def method_fronts(solution_sets: Dict[str, List[EvaluatedEnsemble]],
                  bounds: NormalizationBounds) -> Dict[str, ParetoFront]:
    return {method: normalized_front(candidates, bounds) for method, candidates in solution_sets.items()}


def method_hypervolume(solution_sets: Dict[str, List[EvaluatedEnsemble]]) -> Dict[str, float]:
    """Hypervolume per method at reference (1, 1) after joint min-max normalization."""
    if not solution_sets:
        raise ValueError("at least one method is required")
    for method, candidates in solution_sets.items():
        if not candidates:
            raise ValueError(f"solution set of {method} is empty")
    fronts = method_fronts(solution_sets, joint_bounds(solution_sets))
    return {method: hypervolume_2d(front.points(), REFERENCE_POINT) for method, front in fronts.items()}
