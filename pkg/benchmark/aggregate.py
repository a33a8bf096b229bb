import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import pandas as pd

from ensembles.ensemble import EvaluatedEnsemble
from pareto.front import normalized_front
from predictions.config import NEMENYI_ALPHA
from scoring.metrics import NormalizationBounds

from .results import Method, RunResult, results_frame
from .stats import FriedmanResult, cd_groups, friedman_test, nemenyi_cd, row_ranks

logger = logging.getLogger(__name__)


class MissingCellError(ValueError):
    pass


def _method_order(methods) -> List[str]:
    return sorted(set(methods), key=lambda tag: Method.parse(tag).order)


def _per_dataset_mean(results: Sequence[RunResult], column: str) -> pd.DataFrame:
    if not results:
        raise ValueError("no results to aggregate")
    frame = results_frame(results)
    table = frame.pivot_table(index="dataset", columns="method", values=column, aggfunc="mean")
    table = table.reindex(columns=_method_order(frame["method"])).sort_index()

    missing = [f"({dataset}, {method})" for dataset in table.index for method in table.columns
               if pd.isna(table.loc[dataset, method])]
    if missing:
        raise MissingCellError(f"no results for dataset/method cells: {', '.join(missing)}")
    table.columns.name = None
    return table


def aggregate_hypervolume(results: Sequence[RunResult]) -> pd.DataFrame:
    """Mean hypervolume over folds and seeds, one row per dataset and one column per method."""
    return _per_dataset_mean(results, "hypervolume")


def best_by_validation(solution_set: List[EvaluatedEnsemble], bounds: NormalizationBounds) -> EvaluatedEnsemble:
    """
    Highest validation ROC AUC among the Pareto front members of solution_set;
    ties go to lower inference time, then the smaller (index, count) sequence.
    """
    front = normalized_front(solution_set, bounds)
    return min(front.members(), key=lambda c: (-c.val_auc, c.inference_time_s, c.ensemble.items))


@dataclass
class RankAnalysis:
    """Average ranks per method and, when defined, the Friedman/Nemenyi outcome."""
    metric: str
    ranks: pd.DataFrame
    average_ranks: Dict[str, float]
    friedman: Optional[FriedmanResult] = None
    cd: Optional[float] = None
    groups: List[List[str]] = field(default_factory=list)


def rank_analysis(table: pd.DataFrame, metric: str, alpha: float = NEMENYI_ALPHA) -> RankAnalysis:
    methods = list(table.columns)
    ranks = pd.DataFrame(row_ranks(table.to_numpy()), index=table.index, columns=methods)
    analysis = RankAnalysis(
        metric=metric,
        ranks=ranks,
        average_ranks={m: float(ranks[m].mean()) for m in methods},
    )
    n_datasets, k = table.shape
    if k < 2 or n_datasets < 2:
        logger.warning(
            f"Skipping Friedman/Nemenyi for {metric}: needs >= 2 methods and >= 2 datasets "
            f"(got {k} methods, {n_datasets} datasets)"
        )
        return analysis

    analysis.friedman = friedman_test(table.to_numpy())
    try:
        analysis.cd = nemenyi_cd(k, n_datasets, alpha)
    except ValueError as e:
        logger.warning(f"Skipping critical difference for {metric}: {e}")
        return analysis
    analysis.groups = cd_groups(methods, [analysis.average_ranks[m] for m in methods], analysis.cd)
    return analysis


@dataclass
class BenchmarkReport:
    methods: List[str]
    hypervolume: pd.DataFrame
    best: pd.DataFrame
    hypervolume_ranks: RankAnalysis
    test_auc_ranks: RankAnalysis
    alpha: float = NEMENYI_ALPHA


def build_report(results: Sequence[RunResult], alpha: float = NEMENYI_ALPHA) -> BenchmarkReport:
    hypervolume = aggregate_hypervolume(results)
    test_auc = _per_dataset_mean(results, "best_test_auc")

    frame = results_frame(results)
    best = (
        frame.groupby(["dataset", "method"], sort=False)[
            ["best_val_auc", "best_test_auc", "best_infer_time_s", "best_size", "front_size"]
        ]
        .mean()
        .reset_index()
    )
    best["_order"] = best["method"].map(lambda tag: Method.parse(tag).order)
    best = best.sort_values(["dataset", "_order"], kind="mergesort").drop(columns="_order").reset_index(drop=True)

    return BenchmarkReport(
        methods=list(hypervolume.columns),
        hypervolume=hypervolume,
        best=best,
        hypervolume_ranks=rank_analysis(hypervolume, "hypervolume", alpha),
        test_auc_ranks=rank_analysis(test_auc, "test_auc", alpha),
        alpha=alpha,
    )
