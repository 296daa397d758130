import logging
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any

from app.planner.models import (
    BenchmarkSuite,
    Path,
    PlanResult,
    RunMetrics,
    Scenario,
    TrialRecord,
    Variant,
    VariantMetrics,
)
from app.planner.services.report import ReportService
from app.planner.services.robots import trajectory_points
from app.planner.services.rrt_star import RRTStarService
from app.planner.services.scenario import ScenarioService
from app.planner.services.sopt import (
    SoptService,
    generate_reference,
    reconstruct_inputs,
    trajectory_cost,
)
from app.planner.services.world import min_clearance
from app.planner.utils.constants import AUDIT_TOLERANCE, CSV_FILENAME
from app.planner.utils.errors import PlannerError

logger = logging.getLogger(__name__)


@dataclass
class _Trial:
    scenario: Scenario
    variant: Variant
    index: int


@dataclass
class _TrialOutcome:
    record: TrialRecord
    path: Path | None = None
    result: PlanResult | None = None


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text).strip("_") or "run"


class BenchmarkService:
    def __init__(
        self,
        rrt_star: RRTStarService,
        sopt: SoptService,
        scenario: ScenarioService,
        report: ReportService,
        threads: int = 1,
    ) -> None:
        self.rrt_star = rrt_star
        self.sopt = sopt
        self.scenario = scenario
        self.report = report
        self.threads = max(1, threads)
        logger.debug(f"Benchmark service initialized with {self.threads} worker threads.")

    def _reference_record(self, scenario: Scenario, record: TrialRecord, path: Path) -> None:
        model = scenario.robot
        traj = generate_reference(path, model, scenario.sopt)
        traj.inputs = reconstruct_inputs(model, traj.reference)
        record.reference_cost = trajectory_cost(traj, traj.reference[-1], scenario.sopt)
        clearance, _, _ = min_clearance(
            scenario.world.inflated(model.collision_radius),
            trajectory_points(model, traj.reference),
        )
        record.cost = record.reference_cost
        record.success = clearance >= -AUDIT_TOLERANCE

    def run_trial(self, scenario: Scenario, variant: Variant, index: int) -> _TrialOutcome:
        rrt_cfg = replace(scenario.rrt, seed=scenario.rrt.seed + index)
        sopt_cfg = variant.config(scenario.sopt)
        record = TrialRecord(
            scenario=scenario.name,
            label=variant.label,
            trial=index,
            seed=rrt_cfg.seed,
            segments_initial=sopt_cfg.n_segments if variant.optimize else 0,
        )

        try:
            started = time.perf_counter()
            path = self.rrt_star.plan(
                scenario.world,
                scenario.robot,
                scenario.start_config,
                scenario.goal_config,
                rrt_cfg,
            )
            record.rrt_time = time.perf_counter() - started

            if not variant.optimize:
                self._reference_record(scenario, record, path)
                return _TrialOutcome(record=record, path=path)

            started = time.perf_counter()
            result = self.sopt.plan(scenario.world, scenario.robot, path, sopt_cfg)
            record.opt_time = time.perf_counter() - started
        except PlannerError as exception:
            record.error = f"{type(exception).__name__}: {exception}"
            logger.error(
                f"Trial {index} of '{variant.label}' on '{scenario.name}' failed: {record.error}"
            )
            return _TrialOutcome(record=record)

        record.cost = result.final_cost
        record.reference_cost = result.reference_cost
        record.iterations = result.iterations
        record.segments_final = result.final_segments
        record.success = result.success
        return _TrialOutcome(record=record, path=path, result=result)

    def _emit_plot(self, outcome: _TrialOutcome, scenario: Scenario, out_dir: str) -> None:
        record = outcome.record
        name = _slug(f"{record.scenario}-{record.label}-{record.trial}") + ".svg"
        file_path = os.path.join(out_dir, "svg", name)
        if outcome.result is not None:
            self.report.emit_svg(
                outcome.result.trajectory,
                scenario.world,
                scenario.robot,
                file_path,
                split_points=outcome.result.schedule,
            )
        elif outcome.path is not None:
            traj = generate_reference(outcome.path, scenario.robot, scenario.sopt)
            self.report.emit_svg(traj, scenario.world, scenario.robot, file_path)

    def run_suite(
        self,
        suite: BenchmarkSuite,
        out_dir: str | None = None,
        seed: int | None = None,
        sopt_overrides: dict[str, Any] | None = None,
    ) -> RunMetrics:
        """Runs every (variant, scenario, trial) and aggregates one metrics row per variant.

        `seed` replaces each scenario's base RRT* seed and `sopt_overrides` apply to
        each scenario's optimizer settings before the variant overrides.
        """
        scenarios = [
            scenario.with_planner(
                rrt=replace(scenario.rrt, seed=seed) if seed is not None else None,
                sopt=scenario.sopt.with_overrides(**(sopt_overrides or {})),
            )
            for scenario in self.scenario.suite_scenarios(suite)
        ]
        trials = [
            _Trial(scenario=scenario, variant=variant, index=index)
            for variant in suite.variants
            for scenario in scenarios
            for index in range(suite.trials)
        ]
        threads = suite.threads or self.threads
        logger.info(
            f"Running {len(trials)} trials: {len(scenarios)} scenarios, "
            f"{len(suite.variants)} variants, {suite.trials} trials each, {threads} threads."
        )

        with ThreadPoolExecutor(max_workers=threads) as executor:
            outcomes = list(
                executor.map(
                    lambda trial: self.run_trial(trial.scenario, trial.variant, trial.index),
                    trials,
                )
            )

        metrics = RunMetrics(records=[outcome.record for outcome in outcomes])
        base = scenarios[0].sopt
        for variant in suite.variants:
            records = [record for record in metrics.records if record.label == variant.label]
            segments = variant.config(base).n_segments if variant.optimize else 0
            aggregated = VariantMetrics.aggregate(
                variant.kind(base), variant.label, segments, records
            )
            metrics.variants.append(aggregated)
            logger.info(
                f"Variant '{variant.label}': success {aggregated.success_rate_pct:.1f}%, "
                f"cost {aggregated.cost_mean:.4f}, time {aggregated.time_mean_s:.3f}s."
            )

        if out_dir is not None:
            self.report.emit_csv(metrics, os.path.join(out_dir, CSV_FILENAME))
            for trial, outcome in zip(trials, outcomes):
                self._emit_plot(outcome, trial.scenario, out_dir)

        return metrics
