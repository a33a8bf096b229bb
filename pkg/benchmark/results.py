import logging
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, List

import pandas as pd

logger = logging.getLogger(__name__)


class ResultsFileError(RuntimeError):
    pass


class Method(Enum):
    GES = "GES"
    QO_ES = "QO-ES"
    QDO_ES = "QDO-ES"
    SIZE_QDO_ES = "SIZE-QDO-ES"
    INFER_QDO_ES = "INFER-QDO-ES"

    @classmethod
    def parse(cls, tag: str) -> "Method":
        try:
            return cls(tag.strip().upper())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown method '{tag}' (expected one of {valid})") from None

    @property
    def order(self) -> int:
        return list(Method).index(self)


@dataclass(frozen=True)
class RunResult:
    dataset: str
    fold: int
    seed: int
    method: str
    hypervolume: float
    best_val_auc: float
    best_test_auc: float
    best_infer_time_s: float
    best_size: int
    front_size: int

    def __post_init__(self):
        Method.parse(self.method)
        if not -1e-9 <= self.hypervolume <= 1.0 + 1e-9:
            raise ValueError(f"hypervolume must lie in [0, 1], got {self.hypervolume}")


RESULT_COLUMNS = [
    "dataset", "fold", "seed", "method", "hypervolume", "best_val_auc",
    "best_test_auc", "best_infer_time_s", "best_size", "front_size",
]

FRONT_COLUMNS = [
    "method", "dataset", "fold", "seed", "test_auc", "inference_time_s",
    "norm_obj1", "norm_obj2", "ensemble",
]


def _method_rank(methods: pd.Series) -> pd.Series:
    return methods.map(lambda tag: Method.parse(tag).order)


def sort_rows(frame: pd.DataFrame, extra: List[str] = None) -> pd.DataFrame:
    """Canonical row order so that output never depends on task scheduling."""
    keys = ["dataset", "fold", "seed", "_method_rank"] + (extra or [])
    ordered = frame.assign(_method_rank=_method_rank(frame["method"])).sort_values(keys, kind="mergesort")
    return ordered.drop(columns="_method_rank").reset_index(drop=True)


def results_frame(results: Iterable[RunResult]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in results], columns=RESULT_COLUMNS)


def write_results(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sort_rows(frame[RESULT_COLUMNS]).to_csv(path, index=False)
    logger.debug(f"Wrote {len(frame)} result rows to {path}")
    return path


def write_fronts(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sort_rows(frame[FRONT_COLUMNS], extra=["norm_obj1", "norm_obj2"]).to_csv(path, index=False)
    logger.debug(f"Wrote {len(frame)} front points to {path}")
    return path


def read_results(path) -> List[RunResult]:
    path = Path(path)
    if not path.is_file():
        raise ResultsFileError(f"Results file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype={"dataset": str, "method": str}, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ResultsFileError(f"{path}: cannot parse results ({e})") from e

    missing = [c for c in RESULT_COLUMNS if c not in frame.columns]
    if missing:
        raise ResultsFileError(f"{path}: missing columns {', '.join(missing)}")
    if frame[RESULT_COLUMNS].isna().any().any():
        raise ResultsFileError(f"{path}: empty cells in results")

    try:
        return [
            RunResult(
                dataset=str(row.dataset),
                fold=int(row.fold),
                seed=int(row.seed),
                method=str(row.method),
                hypervolume=float(row.hypervolume),
                best_val_auc=float(row.best_val_auc),
                best_test_auc=float(row.best_test_auc),
                best_infer_time_s=float(row.best_infer_time_s),
                best_size=int(row.best_size),
                front_size=int(row.front_size),
            )
            for row in frame.itertuples(index=False)
        ]
    except ValueError as e:
        raise ResultsFileError(f"{path}: malformed row ({e})") from e


def read_frame(path, columns: List[str]) -> pd.DataFrame:
    """Raw read used for resuming and front plots; returns an empty frame if path is absent."""
    path = Path(path)
    if not path.is_file():
        return pd.DataFrame(columns=columns)
    frame = pd.read_csv(path, dtype={"dataset": str, "method": str, "ensemble": str}, float_precision="round_trip")
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ResultsFileError(f"{path}: missing columns {', '.join(missing)}")
    return frame[columns]
