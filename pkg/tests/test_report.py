import csv
import json
import math

import numpy as np
import pytest
from matplotlib.patches import Polygon as MplPolygon

from app.planner.models import (
    Circle,
    ConvexPolygon,
    Obstacle,
    Path,
    RunMetrics,
    SoptConfig,
    TrialRecord,
    VariantMetrics,
    World,
)
from app.planner.services import report as report_module
from app.planner.services.report import ReportService
from app.planner.services.sopt import SoptService, generate_reference
from app.planner.utils.constants import CSV_HEADER


@pytest.fixture
def report() -> ReportService:
    return ReportService()


@pytest.fixture
def cluttered_world() -> World:
    triangle = ConvexPolygon(vertices=((6.0, 1.0), (8.0, 1.0), (7.0, 2.5)))
    return World(
        obstacles=(
            Obstacle(id=0, shape=Circle(center=(3.0, 7.0), radius=1.0)),
            Obstacle(id=1, shape=Circle(center=(8.0, 8.0), radius=0.5), inflation=0.2),
            Obstacle(id=2, shape=triangle),
        ),
        bounds=(0.0, 0.0, 10.0, 10.0),
    )


def _metrics(label: str = "RRT*-sOpt N=5") -> VariantMetrics:
    records = [
        TrialRecord(
            scenario="s", label=label, trial=i, seed=i, rrt_time=0.5, opt_time=0.25 * (i + 1),
            cost=10.0 + i, iterations=4, segments_initial=5, segments_final=5, success=True,
        )
        for i in range(2)
    ]
    return VariantMetrics.aggregate("sopt", label, 5, records)


# region: SVG


def test_svg_tags_every_drawn_element(report, point_mass, cluttered_world, tmp_path):
    traj = generate_reference(Path([(0.5, 0.5), (9.5, 4.5)]), point_mass, SoptConfig())
    target = tmp_path / "plot.svg"
    report.emit_svg(traj, cluttered_world, point_mass, str(target), split_points=[0, 10, 20])
    svg = target.read_text(encoding="utf-8")

    assert svg.count('id="obstacle-') == 3
    assert svg.count('id="reference"') == 1
    assert svg.count('id="trajectory"') == 1
    assert svg.count('id="splits"') == 1
    assert 'id="pose-' not in svg


def test_svg_grows_polygons_by_their_inflation(report, point_mass, tmp_path, monkeypatch):
    drawn = []

    def recording(xy, **kwargs):
        drawn.append(np.asarray(xy))
        return MplPolygon(xy, **kwargs)

    monkeypatch.setattr(report_module, "PolygonPatch", recording)
    triangle = ConvexPolygon(vertices=((6.0, 1.0), (8.0, 1.0), (7.0, 2.5)))
    world = World(obstacles=(Obstacle(id=0, shape=triangle, inflation=0.3),))
    traj = generate_reference(Path([(0.5, 0.5), (9.5, 4.5)]), point_mass, SoptConfig())
    report.emit_svg(traj, world, point_mass, str(tmp_path / "p.svg"))

    assert len(drawn) == 1
    np.testing.assert_allclose(world.obstacles[0].signed_distance(drawn[0]), 0.0, atol=1e-9)


def test_svg_output_is_byte_identical(report, point_mass, cluttered_world, tmp_path):
    traj = generate_reference(Path([(0.5, 0.5), (9.5, 4.5)]), point_mass, SoptConfig())
    first, second = tmp_path / "a.svg", tmp_path / "b.svg"
    report.emit_svg(traj, cluttered_world, point_mass, str(first), split_points=[0, 50])
    ReportService().emit_svg(traj, cluttered_world, point_mass, str(second), split_points=[0, 50])
    assert first.read_bytes() == second.read_bytes()


def test_svg_draws_arm_poses(report, make_arm, tmp_path):
    arm = make_arm(3)
    world = World(bounds=(-4.0, -4.0, 4.0, 4.0))
    traj = generate_reference(Path([(0.0, 0.0, 0.0), (1.5, 0.5, -0.5)]), arm, SoptConfig())
    target = tmp_path / "nested" / "arm.svg"
    report.emit_svg(traj, world, arm, str(target))
    svg = target.read_text(encoding="utf-8")

    stride = max(1, traj.horizon // 10)
    assert svg.count('id="pose-') == len(range(0, traj.horizon, stride))
    assert 'id="splits"' not in svg


# endregion

# region: CSV


def test_csv_without_variants_is_header_only(report, tmp_path):
    target = tmp_path / "metrics.csv"
    report.emit_csv(RunMetrics(), str(target))
    assert target.read_text(encoding="utf-8") == ",".join(CSV_HEADER) + "\n"


def test_csv_row_matches_metrics(report, tmp_path):
    metrics = _metrics()
    target = tmp_path / "out" / "metrics.csv"
    report.emit_csv(RunMetrics(variants=[metrics]), str(target))

    lines = target.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    with target.open(encoding="utf-8", newline="") as file:
        (row,) = list(csv.DictReader(file))
    assert row["label"] == "RRT*-sOpt N=5"
    assert row["trials"] == "2"
    assert float(row["time_mean_s"]) == metrics.time_mean_s
    assert float(row["cost_mean"]) == pytest.approx(10.5)
    assert float(row["success_rate_pct"]) == pytest.approx(100.0)


def test_aggregate_skips_failed_costs():
    records = [
        TrialRecord(scenario="s", label="x", trial=0, seed=0, cost=4.0, success=True),
        TrialRecord(scenario="s", label="x", trial=1, seed=1, error="PathNotFoundError: none"),
    ]
    metrics = VariantMetrics.aggregate("opt", "x", 1, records)
    assert metrics.cost_mean == pytest.approx(4.0)
    assert metrics.success_rate_pct == pytest.approx(50.0)
    assert metrics.trials == 2


# endregion


def test_plan_json_replaces_infinite_clearance(report, point_mass, empty_world, tmp_path):
    result = SoptService().plan(
        empty_world, point_mass, Path([(0.0, 0.0), (2.0, 0.0)]), SoptConfig(n_segments=1)
    )
    target = tmp_path / "plan.json"
    report.emit_plan_json(result, str(target), name="straight")
    data = json.loads(target.read_text(encoding="utf-8"))

    assert data["scenario"] == "straight"
    assert data["min_clearance"] is None
    assert data["horizon"] == result.trajectory.horizon
    np.testing.assert_allclose(data["states"][-1], (2.0, 0.0), atol=1e-9)
    assert all(math.isfinite(value) for value in data["cost_history"])
