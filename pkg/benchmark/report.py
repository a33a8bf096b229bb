import json
import logging
from pathlib import Path
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from .aggregate import BenchmarkReport, RankAnalysis  # noqa: E402
from .results import Method  # noqa: E402

logger = logging.getLogger(__name__)

# Stable SVG ids and no timestamp, so identical reports render identical files.
plt.rcParams["svg.hashsalt"] = "haes-report"
SVG_METADATA = {"Date": None}


def _rank_rows(analysis: RankAnalysis, means: pd.Series) -> pd.DataFrame:
    return pd.DataFrame({
        "method": list(analysis.average_ranks),
        "avg_rank": list(analysis.average_ranks.values()),
        f"mean_{analysis.metric}": [float(means[m]) for m in analysis.average_ranks],
    })


def _cd_payload(analysis: RankAnalysis, alpha: float) -> dict:
    payload = {
        "metric": analysis.metric,
        "alpha": alpha,
        "methods": [{"method": m, "avg_rank": r} for m, r in analysis.average_ranks.items()],
        "cd_value": analysis.cd,
        "groups": analysis.groups,
        "friedman": None,
    }
    if analysis.friedman is not None:
        payload["friedman"] = {
            "statistic": analysis.friedman.statistic,
            "p_value": analysis.friedman.p_value,
        }
    return payload


def _save(figure, path: Path):
    figure.savefig(path, format="svg", metadata=SVG_METADATA, bbox_inches="tight")
    plt.close(figure)


def plot_critical_difference(analysis: RankAnalysis, path: Path):
    """Methods on an average-rank axis (lower is better) with bars joining non-significant groups."""
    ranked = sorted(analysis.average_ranks.items(), key=lambda item: item[1])
    k = len(ranked)
    figure, ax = plt.subplots(figsize=(6, 1.2 + 0.35 * k))
    ax.set_xlim(k + 0.5, 0.5)
    ax.set_ylim(-(len(analysis.groups) + 1), k + 1)
    ax.xaxis.set_ticks_position("top")
    ax.set_xticks(range(1, k + 1))
    ax.set_yticks([])
    for side in ("left", "right", "bottom"):
        ax.spines[side].set_visible(False)

    for position, (method, rank) in enumerate(ranked):
        y = k - position
        ax.plot([rank, rank], [k + 1, y], color="black", linewidth=0.8)
        ax.text(rank, y, f" {method} ({rank:.2f})", va="center", ha="right" if position < k / 2 else "left",
                fontsize=8)

    for level, group in enumerate(analysis.groups):
        ranks = [analysis.average_ranks[m] for m in group]
        ax.plot([min(ranks), max(ranks)], [-(level + 0.5)] * 2, color="black", linewidth=3)

    title = f"Average rank: {analysis.metric}"
    if analysis.cd is not None:
        title += f" (CD = {analysis.cd:.3f})"
    ax.set_title(title, fontsize=9, pad=20)
    _save(figure, path)


def plot_boxplot(table: pd.DataFrame, ylabel: str, path: Path, log_scale: bool = False):
    figure, ax = plt.subplots(figsize=(1.4 * len(table.columns) + 2, 4))
    ax.boxplot([table[m].to_numpy() for m in table.columns])
    ax.set_xticks(range(1, len(table.columns) + 1))
    ax.set_xticklabels(list(table.columns))
    ax.set_ylabel(ylabel)
    if log_scale:
        ax.set_yscale("log")
    ax.tick_params(axis="x", labelrotation=20)
    _save(figure, path)


def plot_fronts(fronts: pd.DataFrame, out_dir: Path) -> List[Path]:
    """One figure per dataset, using the first fold and seed present for it."""
    written = []
    out_dir.mkdir(parents=True, exist_ok=True)
    for dataset, rows in fronts.groupby("dataset", sort=True):
        fold = rows["fold"].min()
        seed = rows.loc[rows["fold"] == fold, "seed"].min()
        rows = rows[(rows["fold"] == fold) & (rows["seed"] == seed)]

        figure, ax = plt.subplots(figsize=(6, 4))
        for method in sorted(rows["method"].unique(), key=lambda tag: Method.parse(tag).order):
            front = rows[rows["method"] == method].sort_values("norm_obj1")
            ax.step(front["norm_obj1"], front["norm_obj2"], where="post", marker="o", markersize=3, label=method)
        ax.set_xlabel("normalized 1 - ROC AUC (test)")
        ax.set_ylabel("normalized inference time")
        ax.set_title(f"{dataset} (fold {fold}, seed {seed})", fontsize=9)
        ax.legend(fontsize=7)
        path = out_dir / f"{dataset}.svg"
        _save(figure, path)
        written.append(path)
    return written


def emit_report(report: BenchmarkReport, out_dir, plots: bool = True,
                fronts: Optional[pd.DataFrame] = None) -> List[Path]:
    """Write report tables (and figures unless plots is False); returns the written paths."""
    if not report.methods or report.hypervolume.empty:
        raise ValueError("report has no methods or datasets; nothing to emit")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []

    def write_csv(frame: pd.DataFrame, name: str, index: bool = False):
        path = out_dir / name
        frame.to_csv(path, index=index)
        written.append(path)

    def write_json(payload: dict, name: str):
        path = out_dir / name
        path.write_text(json.dumps(payload, indent=2) + "\n")
        written.append(path)

    hypervolume = report.hypervolume
    write_csv(hypervolume, "hypervolume.csv", index=True)
    write_csv(_rank_rows(report.hypervolume_ranks, hypervolume.mean()), "ranks.csv")
    write_json(_cd_payload(report.hypervolume_ranks, report.alpha), "cd.json")
    write_csv(report.best, "best_ensembles.csv")

    test_auc = report.best.pivot(index="dataset", columns="method", values="best_test_auc")[report.methods]
    write_csv(_rank_rows(report.test_auc_ranks, test_auc.mean()), "test_auc_ranks.csv")
    write_json(_cd_payload(report.test_auc_ranks, report.alpha), "cd_test_auc.json")

    if plots:
        plot_critical_difference(report.hypervolume_ranks, out_dir / "cd_plot.svg")
        plot_critical_difference(report.test_auc_ranks, out_dir / "cd_test_auc.svg")
        plot_boxplot(hypervolume, "hypervolume (higher is better)", out_dir / "boxplot.svg")
        infer_time = report.best.pivot(index="dataset", columns="method", values="best_infer_time_s")[report.methods]
        plot_boxplot(infer_time, "best ensemble inference time [s]", out_dir / "infer_time_boxplot.svg",
                     log_scale=True)
        written += [out_dir / n for n in ("cd_plot.svg", "cd_test_auc.svg", "boxplot.svg", "infer_time_boxplot.svg")]
        if fronts is not None and not fronts.empty:
            written += plot_fronts(fronts, out_dir / "fronts")

    logger.info(f"Wrote {len(written)} report files to {out_dir}")
    return written
