import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

from predictions.config import ARCHIVE_BINS, SIZE_DIM_MAX
from predictions.models import ModelRepo
from scoring.metrics import (
    config_similarity,
    ensemble_inference_time,
    ensemble_size,
    prediction_diversity,
)

from .ensemble import Ensemble, EvaluatedEnsemble

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]


class ConfigurationError(ValueError):
    pass


class BehaviorVariant(Enum):
    QDO_BASE = "QDO-BASE"
    SIZE_QDO = "SIZE-QDO"
    INFER_QDO = "INFER-QDO"


class InsertionOutcome(Enum):
    NEW_ELITE = "new-elite"
    REPLACED = "replaced"
    REJECTED = "rejected"


@dataclass(frozen=True)
class DimensionBounds:
    low: float
    high: float
    log_scale: bool = False

    def bin_of(self, value: float, bins: int) -> int:
        """Bin index in [0, bins); values at or beyond a bound clamp into the edge bin."""
        low, high = self.low, self.high
        if self.log_scale:
            if value <= 0 or value <= low:
                return 0
            low, high, value = math.log(low), math.log(high), math.log(value)
        if high <= low:
            return 0
        index = math.floor((value - low) / (high - low) * bins)
        return min(max(index, 0), bins - 1)


@dataclass(frozen=True)
class BehaviorSpec:
    """
    Two-dimensional behavior space of a QDO variant. The first dimension is
    the variant's descriptor, the second is always prediction diversity.
    """
    variant: BehaviorVariant
    bins: Tuple[int, int] = (ARCHIVE_BINS, ARCHIVE_BINS)
    size_max: int = SIZE_DIM_MAX

    def __post_init__(self):
        if len(self.bins) != 2 or min(self.bins) < 2:
            raise ConfigurationError(f"behavior space needs two dimensions with >= 2 bins each, got {self.bins}")
        if self.size_max < 2:
            raise ConfigurationError(f"size dimension upper bound must be >= 2, got {self.size_max}")

    @property
    def dim1_name(self) -> str:
        return {
            BehaviorVariant.QDO_BASE: "config_similarity",
            BehaviorVariant.SIZE_QDO: "ensemble_size",
            BehaviorVariant.INFER_QDO: "inference_time",
        }[self.variant]

    def check(self, repo: ModelRepo):
        if self.variant is BehaviorVariant.QDO_BASE and not repo.has_config_features:
            raise ConfigurationError(
                f"{repo.dataset_id}: {self.variant.value} needs config features, which this repo lacks"
            )

    def describe(self, ensemble: Ensemble, repo: ModelRepo) -> Tuple[float, float]:
        if self.variant is BehaviorVariant.QDO_BASE:
            first = config_similarity(ensemble, repo)
        elif self.variant is BehaviorVariant.SIZE_QDO:
            first = float(ensemble_size(ensemble))
        else:
            first = ensemble_inference_time(ensemble, repo)
        return (first, prediction_diversity(ensemble, repo))

    def bounds(self, repo: ModelRepo) -> Tuple[DimensionBounds, DimensionBounds]:
        if self.variant is BehaviorVariant.QDO_BASE:
            first = DimensionBounds(0.0, 1.0)
        elif self.variant is BehaviorVariant.SIZE_QDO:
            first = DimensionBounds(1.0, float(self.size_max))
        else:
            times = repo.inference_time_s
            first = DimensionBounds(float(times.min()), float(times.sum()), log_scale=True)
        return (first, DimensionBounds(0.0, 1.0))

    def new_archive(self, repo: ModelRepo) -> "BehaviorArchive":
        self.check(repo)
        bounds = self.bounds(repo)
        logger.debug(f"{self.variant.value} archive for {repo.dataset_id}: {self.dim1_name} in [{bounds[0].low}, {bounds[0].high}]")
        return BehaviorArchive(bins=self.bins, bounds=bounds)


@dataclass(frozen=True)
class InsertionRecord:
    cell: Cell
    val_auc: float
    outcome: InsertionOutcome


class BehaviorArchive:
    """Fixed grid over the behavior space holding at most one elite per cell."""

    def __init__(self, bins: Tuple[int, int], bounds: Tuple[DimensionBounds, DimensionBounds]):
        self.bins = tuple(bins)
        self.bounds = tuple(bounds)
        self.grid: Dict[Cell, EvaluatedEnsemble] = {}
        self.log: List[InsertionRecord] = []

    def cell_of(self, behavior: Tuple[float, float]) -> Cell:
        return tuple(
            dim_bounds.bin_of(value, bins)
            for value, dim_bounds, bins in zip(behavior, self.bounds, self.bins)
        )

    def insert(self, candidate: EvaluatedEnsemble) -> InsertionOutcome:
        """Place candidate in its cell; an incumbent is replaced only on strictly higher val_auc."""
        if not all(math.isfinite(v) for v in candidate.behavior):
            raise ValueError(f"behavior descriptor must be finite, got {candidate.behavior}")
        cell = self.cell_of(candidate.behavior)
        incumbent: Optional[EvaluatedEnsemble] = self.grid.get(cell)

        if incumbent is None:
            outcome = InsertionOutcome.NEW_ELITE
        elif candidate.val_auc > incumbent.val_auc:
            outcome = InsertionOutcome.REPLACED
        else:
            outcome = InsertionOutcome.REJECTED

        if outcome is not InsertionOutcome.REJECTED:
            self.grid[cell] = candidate
        self.log.append(InsertionRecord(cell=cell, val_auc=candidate.val_auc, outcome=outcome))
        return outcome

    def elites(self) -> List[EvaluatedEnsemble]:
        return [self.grid[cell] for cell in sorted(self.grid)]

    def __len__(self) -> int:
        return len(self.grid)

    def coverage(self) -> float:
        return len(self.grid) / (self.bins[0] * self.bins[1])

    def qd_score(self) -> float:
        return float(sum(elite.val_auc for elite in self.grid.values()))
