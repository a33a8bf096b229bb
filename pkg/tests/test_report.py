import json

import pandas as pd
import pytest

from benchmark.aggregate import BenchmarkReport, build_report, rank_analysis
from benchmark.report import emit_report
from benchmark.results import FRONT_COLUMNS, Method, RunResult

TABLE_FILES = ["hypervolume.csv", "ranks.csv", "cd.json", "best_ensembles.csv", "test_auc_ranks.csv", "cd_test_auc.json"]
FIGURE_FILES = ["cd_plot.svg", "cd_test_auc.svg", "boxplot.svg", "infer_time_boxplot.svg"]


@pytest.fixture
def report() -> BenchmarkReport:
    results = []
    for d in range(4):
        for position, method in enumerate(Method):
            results.append(RunResult(
                dataset=f"synthetic-{d:03d}",
                fold=0,
                seed=0,
                method=method.value,
                hypervolume=0.1 * position + 0.01 * d,
                best_val_auc=0.9,
                best_test_auc=0.8 - 0.01 * position,
                best_infer_time_s=0.01 * (position + 1),
                best_size=position + 1,
                front_size=3,
            ))
    return build_report(results)


@pytest.fixture
def fronts() -> pd.DataFrame:
    rows = []
    for method in ("GES", "INFER-QDO-ES"):
        for seed in (0, 1):
            rows += [
                [method, "synthetic-000", 0, seed, 0.8, 0.5, 0.0, 1.0, "0:1"],
                [method, "synthetic-000", 0, seed, 0.7, 0.1, 1.0, 0.0, "1:1"],
            ]
    return pd.DataFrame(rows, columns=FRONT_COLUMNS)


class TestEmitReport:
    def test_writes_tables_and_figures(self, report, fronts, tmp_path):
        written = emit_report(report, tmp_path, fronts=fronts)
        for name in TABLE_FILES + FIGURE_FILES:
            assert (tmp_path / name).is_file()
            assert tmp_path / name in written
        assert (tmp_path / "fronts" / "synthetic-000.svg").is_file()

    def test_rank_table(self, report, tmp_path):
        emit_report(report, tmp_path, plots=False)
        ranks = pd.read_csv(tmp_path / "ranks.csv")
        assert list(ranks.columns) == ["method", "avg_rank", "mean_hypervolume"]
        assert ranks["method"].tolist() == [m.value for m in Method]
        # hypervolume grows with the method position, so the last method ranks first
        assert ranks["avg_rank"].tolist() == [5.0, 4.0, 3.0, 2.0, 1.0]

    def test_cd_payload(self, report, tmp_path):
        emit_report(report, tmp_path, plots=False)
        payload = json.loads((tmp_path / "cd.json").read_text())
        assert payload["metric"] == "hypervolume"
        assert payload["alpha"] == 0.05
        assert payload["cd_value"] == pytest.approx(2.728 * (5 * 6 / (6 * 4)) ** 0.5)
        assert [m["method"] for m in payload["methods"]] == [m.value for m in Method]
        assert payload["friedman"]["p_value"] < 0.05
        for group in payload["groups"]:
            assert len(group) >= 2

    def test_no_plots(self, report, tmp_path):
        written = emit_report(report, tmp_path, plots=False)
        assert sorted(p.name for p in written) == sorted(TABLE_FILES)
        assert not list(tmp_path.glob("*.svg"))

    def test_tables_are_deterministic(self, report, tmp_path):
        emit_report(report, tmp_path / "a", plots=False)
        emit_report(report, tmp_path / "b", plots=False)
        for name in TABLE_FILES:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_single_method_report_has_no_cd(self, tmp_path):
        results = [
            RunResult(f"d{d}", 0, 0, "GES", 0.5, 0.9, 0.8, 0.1, 2, 3) for d in range(3)
        ]
        emit_report(build_report(results), tmp_path, plots=False)
        payload = json.loads((tmp_path / "cd.json").read_text())
        assert payload["cd_value"] is None
        assert payload["friedman"] is None
        assert payload["groups"] == []

    def test_empty_report_rejected(self, tmp_path):
        empty = pd.DataFrame()
        analysis = rank_analysis(pd.DataFrame({"GES": [0.5, 0.4]}, index=["d0", "d1"]), "hypervolume")
        report = BenchmarkReport(methods=[], hypervolume=empty, best=empty,
                                 hypervolume_ranks=analysis, test_auc_ranks=analysis)
        with pytest.raises(ValueError, match="nothing to emit"):
            emit_report(report, tmp_path)
