import argparse
import logging
import sys
from dataclasses import replace
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from benchmark.aggregate import build_report
from benchmark.report import emit_report
from benchmark.results import FRONT_COLUMNS, read_frame, read_results
from ensembles.evolution import EvoConfig
from ensembles.greedy import GesConfig
from predictions.config import FRONTS_FILENAME, HAES_OUTPUT_DIR, NEMENYI_ALPHA, RESULTS_FILENAME, setup_logging
from predictions.synthetic import generate_suite

from .benchmark_pipeline import BenchmarkPipeline
from .run_config import RunConfig, load_run_config_file

logger = logging.getLogger(__name__)


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return value


def seed_list(text: str) -> List[int]:
    """'0-9' (inclusive range) or '0,3,7'."""
    try:
        if "-" in text:
            start, stop = (int(part) for part in text.split("-", 1))
            seeds = list(range(start, stop + 1))
        else:
            seeds = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must look like '0-9' or '0,3,7', got {text}") from None
    if not seeds or min(seeds) < 0:
        raise argparse.ArgumentTypeError(f"seeds must be a nonempty list of nonnegative integers, got {text}")
    return seeds


def method_list(text: str) -> List[str]:
    return [m.strip() for m in text.split(",") if m.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="haes",
        description="Hardware-aware post hoc ensemble selection benchmark",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="write a synthetic suite of prediction repos")
    generate.add_argument("--datasets", type=positive_int, required=True)
    generate.add_argument("--models", type=positive_int, required=True)
    generate.add_argument("--folds", type=positive_int, default=1)
    generate.add_argument("--seed", type=nonnegative_int, default=0)
    generate.add_argument("--classes", type=int, default=2)
    generate.add_argument("--val-rows", type=positive_int, default=300)
    generate.add_argument("--test-rows", type=positive_int, default=300)
    generate.add_argument("--coupling", type=float, default=0.5,
                          help="rank coupling between model quality and inference time, in [-1, 1]")
    generate.add_argument("--out", required=True)

    # Defaults stay None so that values from --config are only overridden by explicit flags
    run = commands.add_parser("run", help="run the selectors on every repo and write results.csv")
    run.add_argument("--repos", nargs="+")
    run.add_argument("--methods", type=method_list)
    run.add_argument("--seeds", type=seed_list)
    run.add_argument("--ges-iterations", type=nonnegative_int)
    run.add_argument("--capacity", type=positive_int)
    run.add_argument("--budget", type=nonnegative_int)
    run.add_argument("--batch", type=positive_int)
    run.add_argument("--bins", type=positive_int)
    run.add_argument("--jobs", type=int, help="parallel tasks (default: HAES_JOBS)")
    run.add_argument("--out", help=f"output directory (default: {HAES_OUTPUT_DIR})")
    run.add_argument("--config", help="JSON run-config file")
    run.add_argument("--resume", action="store_true")
    run.add_argument("--fail-fast", action="store_true")

    report = commands.add_parser("report", help="aggregate results.csv into tables, statistics and figures")
    report.add_argument("--results", default=str(Path(HAES_OUTPUT_DIR) / RESULTS_FILENAME))
    report.add_argument("--out", default=str(Path(HAES_OUTPUT_DIR) / "report"))
    report.add_argument("--alpha", type=float, default=NEMENYI_ALPHA)
    report.add_argument("--no-plots", action="store_true")

    return parser


def cmd_generate(args) -> int:
    manifests = generate_suite(
        args.out,
        n_datasets=args.datasets,
        n_folds=args.folds,
        seed=args.seed,
        n_models=args.models,
        n_val=args.val_rows,
        n_test=args.test_rows,
        n_classes=args.classes,
        time_quality_coupling=args.coupling,
    )
    logger.info(f"Wrote {len(manifests)} repos under {args.out}")
    return 0


def run_config_from_args(args) -> RunConfig:
    values = load_run_config_file(args.config) if args.config else {}

    for flag, key in (("repos", "repos"), ("methods", "methods"), ("seeds", "seeds"), ("bins", "bins"),
                      ("jobs", "jobs"), ("out", "output_dir")):
        if getattr(args, flag) is not None:
            values[key] = getattr(args, flag)
    if args.resume:
        values["resume"] = True
    if args.fail_fast:
        values["fail_fast"] = True

    if args.ges_iterations is not None:
        values["ges"] = GesConfig(iterations=args.ges_iterations)
    evo_overrides = {
        key: value for key, value in (
            ("capacity", args.capacity), ("budget", args.budget), ("batch_size", args.batch)
        ) if value is not None
    }
    if evo_overrides:
        values["evo"] = replace(values.get("evo", EvoConfig()), **evo_overrides)

    if "repos" not in values:
        raise ValueError("no repos given (use --repos or a run-config file)")
    return RunConfig(**values)


def cmd_run(args) -> int:
    pipeline = BenchmarkPipeline(run_config_from_args(args))
    stats = pipeline.run()
    logger.info(
        f"Stats: Tasks={stats['tasks']}, Skipped={stats['skipped']}, "
        f"Completed={stats['completed']}, Errors={stats['errors']}"
    )
    if stats["completed"] == 0 and stats["skipped"] == 0:
        logger.error("No task completed")
        return 1
    return 0


def cmd_report(args) -> int:
    results_path = Path(args.results)
    report = build_report(read_results(results_path), alpha=args.alpha)
    fronts = None
    if not args.no_plots:
        fronts = read_frame(results_path.parent / FRONTS_FILENAME, FRONT_COLUMNS)
    emit_report(report, args.out, plots=not args.no_plots, fronts=fronts)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "run": cmd_run,
    "report": cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "report" and args.alpha != NEMENYI_ALPHA:
        parser.error(f"--alpha: only {NEMENYI_ALPHA} is tabulated for the Nemenyi test")

    setup_logging()
    logger.info(f"Starting {args.command}")
    start_time = datetime.now()

    try:
        code = COMMANDS[args.command](args)
    except Exception as e:
        logger.critical(f"Fatal error during {args.command}: {e}", exc_info=True)
        return 1

    duration = datetime.now() - start_time
    logger.info(f"Execution time: {duration}")
    return code


if __name__ == "__main__":
    sys.exit(main())
