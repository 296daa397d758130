"""Statistical checks over many seeded trials. Run with `pytest -m slow`."""

import numpy as np
import pytest

from app.planner.models import BenchmarkSuite, GeneratorSpec, RRTConfig, SoptConfig, Variant
from app.planner.services import (
    BenchmarkService,
    ReportService,
    RRTStarService,
    ScenarioService,
    SoptService,
)
from app.planner.services.robots import trajectory_points
from app.planner.services.world import clearance_matrix
from app.planner.utils.constants import DEFAULT_MAX_ITERATIONS
from app.planner.utils.errors import PlannerError
from tests.conftest import random_world

pytestmark = pytest.mark.slow

POINT_MASS = {"kind": "point_mass_2d", "dt": 0.1, "input_bounds": [[-2, 2], [-2, 2]]}
ARM = {
    "kind": "planar_arm",
    "dt": 0.1,
    "input_bounds": [[-5, 5]] * 5,
    "n_joints": 5,
    "link_lengths": [1.0] * 5,
}


@pytest.fixture(scope="module")
def benchmark() -> BenchmarkService:
    return BenchmarkService(
        RRTStarService(threads=4),
        SoptService(threads=4),
        ScenarioService(),
        ReportService(),
        threads=1,
    )


def _records(metrics, label: str) -> list:
    return [record for record in metrics.records if record.label == label]


@pytest.fixture(scope="module")
def cluttered_run(benchmark):
    generator = GeneratorSpec(
        robot=POINT_MASS,
        bounds=(0.0, 0.0, 20.0, 20.0),
        obstacles=(10, 20),
        count=10,
        seed=100,
        planner={"rrt": {"n_samples": 2000, "steer_step": 1.0}},
    )
    suite = BenchmarkSuite(
        variants=(
            Variant(label="N=1", overrides={"n_segments": 1}),
            Variant(label="N=5", overrides={"n_segments": 5}),
        ),
        generator=generator,
    )
    return benchmark.run_suite(suite)


def test_segmentation_speeds_up_optimization(cluttered_run):
    single = np.mean([record.opt_time for record in _records(cluttered_run, "N=1")])
    split = np.mean([record.opt_time for record in _records(cluttered_run, "N=5")])
    assert split <= 0.6 * single


def test_optimization_improves_on_reference(cluttered_run):
    successes = [record for record in cluttered_run.records if record.success]
    assert successes
    assert all(record.cost < record.reference_cost for record in successes)
    improvement = [1.0 - record.cost / record.reference_cost for record in successes]
    assert np.median(improvement) >= 0.10


def test_most_trials_converge_before_iteration_budget(cluttered_run):
    records = cluttered_run.records
    early = [record for record in records if record.success and record.iterations < DEFAULT_MAX_ITERATIONS]
    assert len(early) >= 0.95 * len(records)


def test_segmented_arm_planning_succeeds_more_often(benchmark):
    generator = GeneratorSpec(
        robot=ARM,
        bounds=(-6.0, -6.0, 6.0, 6.0),
        obstacles=(7, 9),
        radius_range=(0.3, 0.6),
        count=20,
        seed=200,
        planner={"rrt": {"n_samples": 3000, "steer_step": 0.3, "edge_check_resolution": 0.02}},
    )
    suite = BenchmarkSuite(
        variants=tuple(
            Variant(label=f"N={n}", overrides={"n_segments": n}) for n in (1, 3, 5, 7)
        ),
        generator=generator,
    )
    metrics = benchmark.run_suite(suite)

    rates = {label: metrics.by_label(label).success_rate_pct for label in ("N=1", "N=3", "N=5", "N=7")}
    best = max(rates["N=3"], rates["N=5"], rates["N=7"])
    assert best >= 90.0
    assert rates["N=1"] < best


def test_auto_merge_reduces_segments(benchmark):
    generator = GeneratorSpec(
        robot=POINT_MASS, bounds=(0.0, 0.0, 20.0, 20.0), obstacles=(10, 20), count=25, seed=300
    )
    suite = BenchmarkSuite(
        variants=(
            Variant(label="fixed", overrides={"n_segments": 7}),
            Variant(label="merge", overrides={"n_segments": 7, "auto_merge": True}),
        ),
        generator=generator,
    )
    metrics = benchmark.run_suite(suite)

    merged, fixed = metrics.by_label("merge"), metrics.by_label("fixed")
    assert merged.segments_final_mean < 7
    assert merged.iters_mean <= fixed.iters_mean + 1


def test_cost_is_non_increasing_without_resampling(point_mass):
    rrt, sopt = RRTStarService(threads=4), SoptService(threads=4)
    rng = np.random.default_rng(400)
    cfg = SoptConfig(resample=False)
    checked = 0
    for seed in range(50):
        world = random_world(rng, 8)
        try:
            path = rrt.plan(world, point_mass, (0.2, 0.2), (9.8, 9.8), RRTConfig(seed=seed))
            result = sopt.plan(world, point_mass, path, cfg)
        except PlannerError:
            continue
        history = [result.reference_cost, *result.cost_history]
        assert all(b <= a + 1e-6 for a, b in zip(history, history[1:]))
        checked += 1
    assert checked >= 25


def test_successful_trajectories_pass_independent_audit(point_mass):
    rrt, sopt = RRTStarService(threads=4), SoptService(threads=4)
    rng = np.random.default_rng(500)
    for seed in range(20):
        world = random_world(rng, 10)
        try:
            path = rrt.plan(world, point_mass, (0.2, 0.2), (9.8, 9.8), RRTConfig(seed=seed))
            result = sopt.plan(world, point_mass, path, SoptConfig())
        except PlannerError:
            continue
        if result.success:
            points = trajectory_points(point_mass, result.trajectory.waypoints)
            assert clearance_matrix(world, points).min() >= -1e-6


def test_more_samples_shorten_paths(point_mass):
    world = random_world(np.random.default_rng(600), 10)
    service = RRTStarService(threads=4)

    def mean_length(n_samples: int) -> float:
        lengths = []
        for seed in range(50):
            cfg = RRTConfig(n_samples=n_samples, seed=seed)
            try:
                lengths.append(service.plan(world, point_mass, (0.2, 0.2), (9.8, 9.8), cfg).length)
            except PlannerError:
                continue
        return float(np.mean(lengths))

    assert mean_length(2000) <= mean_length(500)
