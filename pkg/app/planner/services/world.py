import logging
import math
from typing import Any

import numpy as np

from app.planner.models import World
from app.planner.utils.errors import DimensionError

logger = logging.getLogger(__name__)


def signed_distance(world: World, obstacle_id: int, point: Any) -> float:
    """Distance from `point` to the inflated boundary of an obstacle, negative inside."""
    return float(world.get(obstacle_id).signed_distance(point)[0])


def distance_gradient(world: World, obstacle_id: int, point: Any) -> np.ndarray:
    return world.get(obstacle_id).gradient(point)[0]


def clearance_matrix(world: World, points: Any) -> np.ndarray:
    """Signed distances with shape (obstacles, points)."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if not world.obstacles:
        return np.empty((0, len(points)))
    return np.stack([obstacle.signed_distance(points) for obstacle in world.obstacles])


def min_clearance(world: World, points: Any) -> tuple[float, int | None, int | None]:
    """Smallest signed distance over every (obstacle, point) pair with its argmin.

    Returns ``(inf, None, None)`` when the world has no obstacles.
    """
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        raise DimensionError("min_clearance needs at least one point.")
    points = points.reshape(-1, 2)

    if not world.obstacles:
        return math.inf, None, None

    distances = clearance_matrix(world, points)
    obstacle_index, point_index = np.unravel_index(np.argmin(distances), distances.shape)
    value = float(distances[obstacle_index, point_index])
    return value, world.obstacles[obstacle_index].id, int(point_index)
