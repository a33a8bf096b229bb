"""End-to-end tests for the generate / run / report commands."""

import json
import shutil

import pandas as pd
import pytest

from benchmark.results import RESULT_COLUMNS
from pipeline.main import main
from predictions.storage import discover_manifests, load_repo

SMALL_RUN = [
    "--seeds", "0-1",
    "--ges-iterations", "5",
    "--capacity", "8",
    "--budget", "40",
    "--batch", "10",
    "--bins", "4",
]


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite")
    code = main([
        "generate", "--datasets", "3", "--models", "6", "--folds", "1", "--seed", "7",
        "--val-rows", "60", "--test-rows", "60", "--out", str(out),
    ])
    assert code == 0
    return out


def run(suite, out, *extra) -> int:
    return main(["run", "--repos", str(suite), "--out", str(out), *SMALL_RUN, *extra])


# =============================================================================
# generate
# =============================================================================


class TestGenerate:
    def test_writes_loadable_manifests(self, tmp_path):
        args = ["--datasets", "2", "--models", "20", "--folds", "3", "--seed", "7", "--val-rows", "50",
                "--test-rows", "50"]
        assert main(["generate", *args, "--out", str(tmp_path / "a")]) == 0
        assert main(["generate", *args, "--out", str(tmp_path / "b")]) == 0

        manifests = discover_manifests(tmp_path / "a")
        assert len(manifests) == 6
        for manifest in manifests:
            assert load_repo(manifest).n_models == 20
            twin = tmp_path / "b" / manifest.relative_to(tmp_path / "a")
            assert manifest.read_bytes() == twin.read_bytes()

    @pytest.mark.parametrize(
        "argv",
        [
            ["generate", "--datasets", "2", "--models", "0", "--out", "x"],
            ["generate", "--datasets", "two", "--models", "3", "--out", "x"],
            ["generate", "--models", "3", "--out", "x"],
            ["run", "--repos", "x", "--seeds", "a-b"],
            ["run", "--repos", "x", "--budget", "-5"],
            ["report", "--alpha", "0.1"],
            [],
        ],
    )
    def test_usage_errors_exit_2(self, argv):
        with pytest.raises(SystemExit) as exit_info:
            main(argv)
        assert exit_info.value.code == 2

    def test_invalid_generator_settings_exit_1(self, tmp_path):
        assert main(["generate", "--datasets", "1", "--models", "3", "--coupling", "3", "--out", str(tmp_path)]) == 1


# =============================================================================
# run
# =============================================================================


class TestRun:
    def test_one_row_per_task_and_method(self, suite, tmp_path):
        assert run(suite, tmp_path) == 0
        results = pd.read_csv(tmp_path / "results.csv")
        assert list(results.columns) == RESULT_COLUMNS
        assert len(results) == 3 * 1 * 2 * 5
        assert results["hypervolume"].between(0, 1).all()
        assert (results["front_size"] >= 1).all()

        fronts = pd.read_csv(tmp_path / "fronts.csv")
        sizes = fronts.groupby(["dataset", "fold", "seed", "method"]).size()
        merged = results.set_index(["dataset", "fold", "seed", "method"])["front_size"]
        assert sizes.sort_index().tolist() == merged.sort_index().tolist()

    def test_deterministic(self, suite, tmp_path):
        assert run(suite, tmp_path / "a") == 0
        assert run(suite, tmp_path / "b") == 0
        for name in ("results.csv", "fronts.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_jobs_do_not_change_results(self, suite, tmp_path):
        assert run(suite, tmp_path / "serial", "--jobs", "1") == 0
        assert run(suite, tmp_path / "parallel", "--jobs", "2") == 0
        for name in ("results.csv", "fronts.csv"):
            assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes()

    def test_single_method_normalizes_on_its_own(self, suite, tmp_path):
        assert run(suite, tmp_path, "--methods", "GES") == 0
        results = pd.read_csv(tmp_path / "results.csv")
        assert results["method"].unique().tolist() == ["GES"]
        assert len(results) == 3 * 2
        # GES is deterministic, so every seed of a dataset scores the same
        assert (results.groupby("dataset")["hypervolume"].nunique() == 1).all()

    def test_resume_completes_missing_seeds(self, suite, tmp_path):
        assert run(suite, tmp_path / "fresh") == 0
        assert main(["run", "--repos", str(suite), "--out", str(tmp_path / "resumed"),
                     *SMALL_RUN[2:], "--seeds", "0"]) == 0
        assert run(suite, tmp_path / "resumed", "--resume") == 0
        for name in ("results.csv", "fronts.csv"):
            assert (tmp_path / "fresh" / name).read_bytes() == (tmp_path / "resumed" / name).read_bytes()

    def test_resume_with_fewer_methods_recomputes(self, suite, tmp_path):
        assert run(suite, tmp_path / "fresh", "--methods", "GES") == 0
        assert run(suite, tmp_path / "resumed", "--methods", "GES,QO-ES") == 0
        assert run(suite, tmp_path / "resumed", "--methods", "GES", "--resume") == 0

        resumed = pd.read_csv(tmp_path / "resumed" / "results.csv")
        assert resumed["method"].unique().tolist() == ["GES"]
        assert len(resumed) == 3 * 2
        for name in ("results.csv", "fronts.csv"):
            assert (tmp_path / "fresh" / name).read_bytes() == (tmp_path / "resumed" / name).read_bytes()

    def test_invalid_repo_is_skipped(self, suite, tmp_path):
        broken = tmp_path / "repos"
        shutil.copytree(suite, broken)
        first = sorted(broken.rglob("manifest.json"))[0]
        first.write_text("{broken")

        assert run(broken, tmp_path / "out") == 0
        results = pd.read_csv(tmp_path / "out" / "results.csv")
        assert results["dataset"].nunique() == 2

        assert run(broken, tmp_path / "strict", "--fail-fast") == 1

    def test_manifest_missing_field_is_skipped(self, suite, tmp_path):
        broken = tmp_path / "repos"
        shutil.copytree(suite, broken)
        manifest = sorted(broken.rglob("manifest.json"))[1]
        content = json.loads(manifest.read_text())
        del content["models"][1]["inference_time_s"]
        manifest.write_text(json.dumps(content))

        assert run(broken, tmp_path / "out") == 0
        results = pd.read_csv(tmp_path / "out" / "results.csv")
        assert results["dataset"].nunique() == 2
        assert len(results) == 2 * 2 * 5

    def test_no_valid_repo_fails(self, suite, tmp_path):
        broken = tmp_path / "repos"
        shutil.copytree(suite, broken)
        for manifest in broken.rglob("manifest.json"):
            manifest.write_text("{broken")
        assert run(broken, tmp_path / "out") == 1

    def test_run_config_file_with_overrides(self, suite, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({
            "repos": [str(suite)],
            "methods": ["GES", "QO-ES"],
            "seeds": [0],
            "ges": {"iterations": 3},
            "evo": {"capacity": 6, "budget": 20, "batch_size": 10},
        }))
        assert main(["run", "--config", str(config), "--out", str(tmp_path / "a")]) == 0
        assert len(pd.read_csv(tmp_path / "a" / "results.csv")) == 3 * 2

        assert main(["run", "--config", str(config), "--methods", "GES", "--out", str(tmp_path / "b")]) == 0
        assert pd.read_csv(tmp_path / "b" / "results.csv")["method"].unique().tolist() == ["GES"]

    def test_unknown_config_key_fails(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"repos": ["x"], "generations": 3}))
        assert main(["run", "--config", str(config)]) == 1

    def test_missing_repos_fails(self, tmp_path):
        assert main(["run", "--out", str(tmp_path)]) == 1
        assert main(["run", "--repos", str(tmp_path / "nothing"), "--out", str(tmp_path)]) == 1


# =============================================================================
# report
# =============================================================================


class TestReport:
    def test_full_pipeline(self, suite, tmp_path):
        assert run(suite, tmp_path) == 0
        assert main(["report", "--results", str(tmp_path / "results.csv"), "--out", str(tmp_path / "report")]) == 0

        report = tmp_path / "report"
        for name in ("hypervolume.csv", "ranks.csv", "cd.json", "best_ensembles.csv", "cd_plot.svg", "boxplot.svg"):
            assert (report / name).is_file()
        assert len(list((report / "fronts").glob("*.svg"))) == 3
        assert len(pd.read_csv(report / "hypervolume.csv")) == 3

    def test_single_method_skips_cd(self, suite, tmp_path):
        assert run(suite, tmp_path, "--methods", "GES") == 0
        assert main(["report", "--results", str(tmp_path / "results.csv"), "--out", str(tmp_path / "report"),
                     "--no-plots"]) == 0
        payload = json.loads((tmp_path / "report" / "cd.json").read_text())
        assert payload["cd_value"] is None

    def test_missing_results_fails(self, tmp_path):
        assert main(["report", "--results", str(tmp_path / "results.csv"), "--out", str(tmp_path)]) == 1

    def test_malformed_results_fails(self, tmp_path):
        (tmp_path / "results.csv").write_text("dataset,fold\nd0,0\n")
        assert main(["report", "--results", str(tmp_path / "results.csv"), "--out", str(tmp_path)]) == 1
