import logging
from dataclasses import replace
from typing import Any, Dict, List, Optional, Set, Tuple

import pandas as pd
from joblib import Parallel, delayed

from benchmark.aggregate import best_by_validation
from benchmark.results import (
    FRONT_COLUMNS,
    RESULT_COLUMNS,
    Method,
    RunResult,
    read_frame,
    results_frame,
    write_fronts,
    write_results,
)
from ensembles.archive import BehaviorSpec, BehaviorVariant
from ensembles.ensemble import EvaluatedEnsemble
from ensembles.evolution import EvoConfig, run_qdoes, run_qoes, solution_set
from ensembles.greedy import GesConfig, ges_solution_set, run_ges
from pareto.front import joint_bounds, method_fronts
from pareto.hypervolume import hypervolume_2d
from predictions.config import FRONTS_FILENAME, RESULTS_FILENAME
from predictions.models import ModelRepo, RepoValidationError
from predictions.storage import discover_manifests, load_repo

from .run_config import RunConfig

logger = logging.getLogger(__name__)

TaskKey = Tuple[str, int, int]

QDO_VARIANTS = {
    Method.QDO_ES: BehaviorVariant.QDO_BASE,
    Method.SIZE_QDO_ES: BehaviorVariant.SIZE_QDO,
    Method.INFER_QDO_ES: BehaviorVariant.INFER_QDO,
}


def method_solution_set(method: Method, repo: ModelRepo, seed: int, ges: GesConfig,
                        evo: EvoConfig, bins: int) -> List[EvaluatedEnsemble]:
    """Candidate ensembles one method contributes to the Pareto front."""
    if method is Method.GES:
        return ges_solution_set(run_ges(repo, ges))
    evo = replace(evo, seed=seed)
    if method is Method.QO_ES:
        return solution_set(run_qoes(repo, evo), repo)
    spec = BehaviorSpec(QDO_VARIANTS[method], bins=(bins, bins))
    return solution_set(run_qdoes(repo, evo, spec), repo, spec.describe)


def run_task(repo: ModelRepo, seed: int, methods: List[str], ges: GesConfig, evo: EvoConfig,
             bins: int) -> Tuple[List[RunResult], List[Dict[str, Any]]]:
    """
    All methods on one (dataset, fold, seed). Hypervolumes share normalization
    bounds taken from the union of the methods' candidates.
    """
    solution_sets = {
        tag: method_solution_set(Method.parse(tag), repo, seed, ges, evo, bins) for tag in methods
    }
    bounds = joint_bounds(solution_sets)
    fronts = method_fronts(solution_sets, bounds)

    results, front_rows = [], []
    for tag, front in fronts.items():
        best = best_by_validation(solution_sets[tag], bounds)
        results.append(RunResult(
            dataset=repo.dataset_id,
            fold=repo.fold_id,
            seed=seed,
            method=tag,
            hypervolume=hypervolume_2d(front.points()),
            best_val_auc=best.val_auc,
            best_test_auc=best.test_auc,
            best_infer_time_s=best.inference_time_s,
            best_size=best.size,
            front_size=len(front),
        ))
        for entry in front.entries:
            front_rows.append({
                "method": tag,
                "dataset": repo.dataset_id,
                "fold": repo.fold_id,
                "seed": seed,
                "test_auc": entry.evaluated.test_auc,
                "inference_time_s": entry.evaluated.inference_time_s,
                "norm_obj1": entry.point[0],
                "norm_obj2": entry.point[1],
                "ensemble": entry.evaluated.ensemble.label(repo.model_ids),
            })
    return results, front_rows


def _guarded_task(repo: ModelRepo, seed: int, config: RunConfig):
    try:
        results, fronts = run_task(repo, seed, config.methods, config.ges, config.evo, config.bins)
        return results, fronts, None
    except Exception as e:
        return [], [], f"{type(e).__name__}: {e}"


class BenchmarkPipeline:
    def __init__(self, config: RunConfig):
        self.config = config
        self.results_path = config.results_dir / RESULTS_FILENAME
        self.fronts_path = config.results_dir / FRONTS_FILENAME
        self.stats = {
            "tasks": 0,
            "skipped": 0,
            "completed": 0,
            "errors": 0
        }

    def load_repos(self) -> List[ModelRepo]:
        repos = []
        manifests = [m for root in self.config.repos for m in discover_manifests(root)]
        if not manifests:
            raise FileNotFoundError(f"No manifests found under {', '.join(self.config.repos)}")

        for manifest in manifests:
            try:
                repos.append(load_repo(manifest))
            except (RepoValidationError, FileNotFoundError) as e:
                logger.error(f"Skipping invalid repo {manifest}: {e}")
                self.stats["errors"] += 1
                if self.config.fail_fast:
                    raise
        logger.info(f"Loaded {len(repos)} of {len(manifests)} repos")
        return repos

    def _completed_keys(self, existing: pd.DataFrame) -> Set[TaskKey]:
        """Groups whose stored methods are exactly the requested ones; any other group is rerun whole."""
        wanted = set(self.config.methods)
        done = set()
        for (dataset, fold, seed), rows in existing.groupby(["dataset", "fold", "seed"]):
            if set(rows["method"]) == wanted:
                done.add((str(dataset), int(fold), int(seed)))
        return done

    def run(self) -> Dict[str, int]:
        logger.info("Starting benchmark pipeline...")
        repos = self.load_repos()

        existing = read_frame(self.results_path, RESULT_COLUMNS) if self.config.resume else None
        existing_fronts = read_frame(self.fronts_path, FRONT_COLUMNS) if self.config.resume else None
        done: Set[TaskKey] = self._completed_keys(existing) if existing is not None else set()

        tasks = []
        for repo in repos:
            for seed in self.config.seeds:
                if (repo.dataset_id, repo.fold_id, seed) in done:
                    self.stats["skipped"] += 1
                    continue
                tasks.append((repo, seed))
        self.stats["tasks"] = len(tasks)
        logger.info(f"Running {len(tasks)} tasks ({self.stats['skipped']} already done) with {self.config.jobs} jobs")

        outcomes = Parallel(n_jobs=self.config.jobs)(
            delayed(_guarded_task)(repo, seed, self.config) for repo, seed in tasks
        )

        results: List[RunResult] = []
        front_rows: List[Dict[str, Any]] = []
        for (repo, seed), (task_results, task_fronts, error) in zip(tasks, outcomes):
            if error is not None:
                logger.error(f"Task {repo.dataset_id} fold {repo.fold_id} seed {seed} failed: {error}")
                self.stats["errors"] += 1
                if self.config.fail_fast:
                    raise RuntimeError(f"{repo.dataset_id} fold {repo.fold_id} seed {seed}: {error}")
                continue
            results.extend(task_results)
            front_rows.extend(task_fronts)
            self.stats["completed"] += 1

        self._write(results, front_rows, existing, existing_fronts, done)
        logger.info(f"Pipeline finished. Completed {self.stats['completed']} tasks.")
        return self.stats

    def _write(self, results: List[RunResult], front_rows: List[Dict[str, Any]],
               existing: Optional[pd.DataFrame], existing_fronts: Optional[pd.DataFrame], done: Set[TaskKey]):
        frames = [results_frame(results)]
        fronts = [pd.DataFrame(front_rows, columns=FRONT_COLUMNS)]
        if existing is not None:
            # keep only fully finished groups; partial ones were recomputed as a whole
            frames.insert(0, self._keep_done(existing, done))
            fronts.insert(0, self._keep_done(existing_fronts, done))

        write_results(self._concat(frames, RESULT_COLUMNS), self.results_path)
        write_fronts(self._concat(fronts, FRONT_COLUMNS), self.fronts_path)
        logger.info(f"Wrote results to {self.results_path} and fronts to {self.fronts_path}")

    @staticmethod
    def _concat(frames: List[pd.DataFrame], columns: List[str]) -> pd.DataFrame:
        frames = [f for f in frames if not f.empty]
        if not frames:
            return pd.DataFrame(columns=columns)
        return pd.concat(frames, ignore_index=True)[columns]

    @staticmethod
    def _keep_done(frame: pd.DataFrame, done: Set[TaskKey]) -> pd.DataFrame:
        if frame.empty:
            return frame
        keys = zip(frame["dataset"].astype(str), frame["fold"].astype(int), frame["seed"].astype(int))
        return frame[[key in done for key in keys]]
