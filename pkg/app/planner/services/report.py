import csv
import json
import logging
import math
import os
from typing import Any

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Circle as CirclePatch
from matplotlib.patches import Polygon as PolygonPatch

from app.planner.models import (
    Circle,
    PlanarArm,
    PlanResult,
    RobotModel,
    RunMetrics,
    Scenario,
    Trajectory,
    World,
)
from app.planner.utils.constants import (
    CSV_HEADER,
    SCENARIO_ENCODING,
    SVG_ARM_POSES,
    SVG_CORNER_ARC_POINTS,
    SVG_FIGURE_SIZE,
    SVG_HASH_SALT,
)

logger = logging.getLogger(__name__)

OBSTACLE_COLOR = "#9e9e9e"
TRAJECTORY_COLOR = "#1565c0"
REFERENCE_COLOR = "#ef6c00"
SPLIT_COLOR = "#c62828"
ARM_COLOR = "#455a64"


def _trace(model: RobotModel, states: np.ndarray) -> np.ndarray:
    """Workspace polyline of a state sequence: the body for a point, the tip for an arm."""
    configurations = model.configuration_of(np.asarray(states, dtype=float))
    return model.collision_points_batch(configurations)[:, -1, :]


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, list):
        return [_json_safe(item) for item in value]
    return value


class ReportService:
    """Writes SVG plots, CSV metrics and JSON plan summaries."""

    def __init__(self) -> None:
        matplotlib.rcParams["svg.hashsalt"] = SVG_HASH_SALT
        logger.debug("Report service initialized.")

    def emit_svg(
        self,
        traj: Trajectory,
        world: World,
        model: RobotModel,
        file_path: str,
        split_points: list[int] | None = None,
    ) -> None:
        figure = Figure(figsize=SVG_FIGURE_SIZE)
        axes = figure.add_subplot()
        xmin, ymin, xmax, ymax = world.bounds
        axes.set_xlim(xmin, xmax)
        axes.set_ylim(ymin, ymax)
        axes.set_aspect("equal")

        for obstacle in world.obstacles:
            shape = obstacle.shape
            if isinstance(shape, Circle):
                patch = CirclePatch(shape.center, shape.radius + obstacle.inflation)
            else:
                outline = shape.outline(obstacle.inflation, SVG_CORNER_ARC_POINTS)
                patch = PolygonPatch(outline, closed=True)
            patch.set_facecolor(OBSTACLE_COLOR)
            patch.set_edgecolor("none")
            patch.set_gid(f"obstacle-{obstacle.id}")
            axes.add_patch(patch)

        if traj.reference is not None:
            reference = _trace(model, traj.reference)
            (line,) = axes.plot(
                reference[:, 0], reference[:, 1], linestyle="--", color=REFERENCE_COLOR
            )
            line.set_gid("reference")

        waypoints = traj.waypoints
        if isinstance(model, PlanarArm):
            stride = max(1, traj.horizon // SVG_ARM_POSES)
            poses = model.joint_positions(model.configuration_of(waypoints[::stride]))
            for index, pose in enumerate(poses):
                (line,) = axes.plot(pose[:, 0], pose[:, 1], color=ARM_COLOR, alpha=0.4)
                line.set_gid(f"pose-{index}")

        path = _trace(model, waypoints)
        (line,) = axes.plot(path[:, 0], path[:, 1], linestyle="-", color=TRAJECTORY_COLOR)
        line.set_gid("trajectory")

        if split_points:
            marks = path[[index for index in split_points if index < len(path)]]
            (line,) = axes.plot(
                marks[:, 0], marks[:, 1], linestyle="none", marker="o", color=SPLIT_COLOR
            )
            line.set_gid("splits")

        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        figure.savefig(file_path, format="svg", metadata={"Date": None})
        logger.debug(f"Wrote trajectory plot to {file_path}.")

    def emit_csv(self, metrics: RunMetrics, file_path: str) -> None:
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(file_path, "w", encoding=SCENARIO_ENCODING, newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for variant in metrics.variants:
                writer.writerow([_format_value(value) for value in variant.row()])
        logger.info(f"Wrote metrics for {len(metrics.variants)} variants to {file_path}.")

    def emit_plan_json(
        self,
        result: PlanResult,
        file_path: str,
        name: str = "",
        scenario: Scenario | None = None,
    ) -> None:
        """Plan summary; `scenario` records the effective world, robot and planner settings."""
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        payload: dict[str, Any] = {"scenario": name, **result.to_dict()}
        if scenario is not None:
            payload["settings"] = scenario.to_dict()
        with open(file_path, "w", encoding=SCENARIO_ENCODING) as file:
            json.dump(_json_safe(payload), file, indent=2)
        logger.debug(f"Wrote plan report to {file_path}.")
