import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import Any

from environs import EnvError
from marshmallow import ValidationError

from app import logger
from app.config import Config, load_config
from app.planner import services
from app.planner.models import ServicesContainer
from app.planner.utils.constants import (
    CSV_FILENAME,
    PLAN_REPORT_FILENAME,
    PLAN_SVG_FILENAME,
    ExitCode,
)
from app.planner.utils.errors import PlannerError, ScenarioValidationError


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="python -m app",
        description="RRT* reference paths refined by segmented trajectory optimization.",
    )
    verbs = parser.add_subparsers(dest="verb", required=True)

    tuning = argparse.ArgumentParser(add_help=False)
    tuning.add_argument("--seed", type=int, default=None, help="Base RRT* seed.")
    tuning.add_argument(
        "--segments", type=int, default=None, help="Initial number of segments N."
    )
    tuning.add_argument(
        "--auto-merge",
        action="store_true",
        default=None,
        help="Merge adjacent segments that stop making progress.",
    )
    tuning.add_argument(
        "--max-iter", type=int, default=None, help="Maximum optimizer iterations."
    )
    tuning.add_argument(
        "--threads", type=int, default=None, help="Worker threads (overrides PLANNER_THREADS)."
    )
    tuning.add_argument(
        "--no-resample",
        action="store_false",
        dest="resample",
        default=None,
        help="Keep the horizon fixed across iterations.",
    )

    plan = verbs.add_parser("plan", parents=[tuning], help="Plan one scenario.")
    plan.add_argument("scenario", help="Scenario JSON file.")
    plan.add_argument("--out", default=None, help="Directory for plan.json and plan.svg.")

    bench = verbs.add_parser("bench", parents=[tuning], help="Run a benchmark suite.")
    bench.add_argument("suite", help="Suite JSON file.")
    bench.add_argument("--out", default=None, help="Directory for metrics.csv and plots.")

    validate = verbs.add_parser("validate", help="Validate a scenario file.")
    validate.add_argument("scenario", help="Scenario JSON file.")

    return parser.parse_args(argv)


def _sopt_overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {
        "n_segments": getattr(args, "segments", None),
        "auto_merge": getattr(args, "auto_merge", None),
        "max_iterations": getattr(args, "max_iter", None),
        "resample": getattr(args, "resample", None),
    }


def run_plan(args: argparse.Namespace, container: ServicesContainer) -> ExitCode:
    scenario = container.scenario.load(args.scenario)
    rrt_cfg = scenario.rrt if args.seed is None else replace(scenario.rrt, seed=args.seed)
    sopt_cfg = scenario.sopt.with_overrides(**_sopt_overrides(args))

    path = container.rrt_star.plan(
        scenario.world, scenario.robot, scenario.start_config, scenario.goal_config, rrt_cfg
    )
    result = container.sopt.plan(scenario.world, scenario.robot, path, sopt_cfg)

    if args.out:
        container.report.emit_plan_json(
            result,
            os.path.join(args.out, PLAN_REPORT_FILENAME),
            name=scenario.name,
            scenario=scenario.with_planner(rrt=rrt_cfg, sopt=sopt_cfg),
        )
        container.report.emit_svg(
            result.trajectory,
            scenario.world,
            scenario.robot,
            os.path.join(args.out, PLAN_SVG_FILENAME),
            split_points=result.schedule,
        )

    print(
        f"{scenario.name}: success={result.success} cost={result.final_cost:.6f} "
        f"reference_cost={result.reference_cost:.6f} iterations={result.iterations} "
        f"segments={result.initial_segments}->{result.final_segments}"
    )
    return ExitCode.SUCCESS if result.success else ExitCode.PLANNING_FAILURE


def run_bench(args: argparse.Namespace, container: ServicesContainer, config: Config) -> ExitCode:
    suite = container.scenario.load_suite(args.suite)
    out_dir = args.out or config.runtime.OUTPUT_DIR
    metrics = container.benchmark.run_suite(
        suite, out_dir=out_dir, seed=args.seed, sopt_overrides=_sopt_overrides(args)
    )
    for variant in metrics.variants:
        print(
            f"{variant.label} [{variant.variant}]: success={variant.success_rate_pct:.1f}% "
            f"cost={variant.cost_mean:.6f} time={variant.time_mean_s:.3f}s "
            f"segments={variant.segments_initial}->{variant.segments_final_mean:.2f}"
        )
    print(f"Metrics written to {os.path.join(out_dir, CSV_FILENAME)}")
    return ExitCode.SUCCESS


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)

    # Load configuration
    try:
        config = load_config()
    except (EnvError, ValidationError) as exception:
        print(f"Invalid environment: {exception}", file=sys.stderr)
        return ExitCode.VALIDATION_ERROR

    threads = getattr(args, "threads", None)
    if threads is not None:
        if threads < 1:
            print("--threads must be >= 1", file=sys.stderr)
            return ExitCode.VALIDATION_ERROR
        config.runtime.THREADS = threads

    # Set up logging
    logger.setup_logging(config.logging)

    # Initialize services
    container = services.initialize(config)

    try:
        if args.verb == "validate":
            container.scenario.load(args.scenario)
            print("OK")
            return ExitCode.SUCCESS
        if args.verb == "plan":
            return run_plan(args, container)
        return run_bench(args, container, config)
    except ScenarioValidationError as exception:
        logging.error(f"Validation failed: {exception}")
        print(str(exception), file=sys.stderr)
        return ExitCode.VALIDATION_ERROR
    except PlannerError as exception:
        logging.error(f"Planning failed: {exception}")
        print(str(exception), file=sys.stderr)
        return ExitCode.PLANNING_FAILURE
    except ValueError as exception:
        # invalid command-line overrides
        logging.error(f"Validation failed: {exception}")
        print(str(exception), file=sys.stderr)
        return ExitCode.VALIDATION_ERROR
    except OSError as exception:
        logging.error(f"I/O error: {exception}")
        print(str(exception), file=sys.stderr)
        return ExitCode.IO_ERROR


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logging.info("Interrupted.")
        sys.exit(ExitCode.PLANNING_FAILURE)
