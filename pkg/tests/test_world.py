import math

import numpy as np
import pytest

from app.planner.models import Circle, ConvexPolygon, Obstacle, World
from app.planner.services.world import (
    clearance_matrix,
    distance_gradient,
    min_clearance,
    signed_distance,
)
from app.planner.utils.errors import DimensionError, ObstacleNotFoundError
from tests.conftest import random_world


def test_circle_signed_distance(unit_circle_world):
    assert signed_distance(unit_circle_world, 0, (2.0, 0.0)) == pytest.approx(1.0)
    assert signed_distance(unit_circle_world, 0, (0.0, 0.0)) == pytest.approx(-1.0)


def test_inflated_square_distance(square):
    world = World(obstacles=(Obstacle(id=7, shape=square, inflation=0.5),))
    assert signed_distance(world, 7, (3.0, 1.0)) == pytest.approx(1.5)


def test_polygon_distance_matches_dense_boundary_scan(square, rng):
    world = World(obstacles=(Obstacle(id=0, shape=square),))
    corners = np.asarray(square.vertices)
    ts = np.linspace(0.0, 1.0, 4001)[:, None]
    boundary = np.vstack([a + ts * (b - a) for a, b in zip(corners, np.roll(corners, -1, axis=0))])

    for point in rng.uniform(-4.0, 4.0, size=(1000, 2)):
        expected = np.linalg.norm(boundary - point, axis=1).min()
        if np.all(np.abs(point) < 1.0):
            expected = -expected
        assert signed_distance(world, 0, point) == pytest.approx(expected, abs=1e-3)


@pytest.mark.parametrize(
    "point, expected",
    [
        ((2.0, 0.0), (1.0, 0.0)),
        ((0.0, 0.5), (0.0, 1.0)),
    ],
)
def test_circle_gradient(unit_circle_world, point, expected):
    np.testing.assert_allclose(distance_gradient(unit_circle_world, 0, point), expected)


def test_square_gradient_at_corner_region(square):
    world = World(obstacles=(Obstacle(id=0, shape=square),))
    half = math.sqrt(2.0) / 2.0
    np.testing.assert_allclose(distance_gradient(world, 0, (3.0, 3.0)), (half, half), atol=1e-9)


def test_gradient_matches_finite_differences(square, rng):
    obstacles = (
        Obstacle(id=0, shape=square),
        Obstacle(id=1, shape=Circle(center=(3.0, -2.0), radius=0.7)),
    )
    step = 1e-6
    for obstacle in obstacles:
        points = rng.uniform(-4.0, 4.0, size=(1000, 2))
        numeric = np.column_stack(
            [
                (
                    obstacle.signed_distance(points + step * axis)
                    - obstacle.signed_distance(points - step * axis)
                )
                / (2 * step)
                for axis in np.eye(2)
            ]
        )
        np.testing.assert_allclose(obstacle.gradient(points), numeric, atol=1e-4)


@pytest.mark.parametrize(
    "shape",
    [
        Circle(center=(0.5, -0.5), radius=1.2),
        ConvexPolygon(vertices=((-1.0, -1.0), (1.0, -1.0), (1.5, 0.5), (0.0, 1.5))),
    ],
)
def test_first_order_bound_holds_outside(shape, rng):
    obstacle = Obstacle(id=0, shape=shape, inflation=0.3)
    pairs = rng.uniform(-5.0, 5.0, size=(4000, 2, 2))
    p, q = pairs[:, 0], pairs[:, 1]
    outside = (obstacle.signed_distance(p) >= 0) & (obstacle.signed_distance(q) >= 0)
    p, q = p[outside][:1000], q[outside][:1000]
    assert len(p) == 1000

    linear = obstacle.signed_distance(p) + np.einsum("ij,ij->i", obstacle.gradient(p), q - p)
    assert np.all(obstacle.signed_distance(q) >= linear - 1e-9)


def test_inflated_polygon_outline_lies_on_boundary():
    triangle = ConvexPolygon(vertices=((6.0, 1.0), (8.0, 1.0), (7.0, 2.5)))
    obstacle = Obstacle(id=0, shape=triangle, inflation=0.4)
    outline = triangle.outline(obstacle.inflation, arc_points=6)

    assert outline.shape == (18, 2)
    np.testing.assert_allclose(obstacle.signed_distance(outline), 0.0, atol=1e-9)
    np.testing.assert_array_equal(triangle.outline(), np.asarray(triangle.vertices))


def test_signed_distance_is_one_lipschitz(square, rng):
    world = World(obstacles=(Obstacle(id=0, shape=square),))
    for p, q in rng.uniform(-3.0, 3.0, size=(1000, 2, 2)):
        gap = abs(signed_distance(world, 0, p) - signed_distance(world, 0, q))
        assert gap <= np.linalg.norm(p - q) + 1e-12


def test_unknown_obstacle_raises(unit_circle_world):
    with pytest.raises(ObstacleNotFoundError):
        signed_distance(unit_circle_world, 42, (0.0, 0.0))


def test_min_clearance_without_obstacles():
    assert min_clearance(World(), [(1.0, 1.0), (2.0, 2.0)]) == (math.inf, None, None)


def test_min_clearance_picks_closest_point(unit_circle_world):
    value, obstacle_id, index = min_clearance(unit_circle_world, [(3.0, 0.0), (1.5, 0.0)])
    assert value == pytest.approx(0.5)
    assert obstacle_id == 0
    assert index == 1


def test_min_clearance_matches_pairwise_scan(rng):
    world = random_world(rng, 3)
    points = rng.uniform(0.0, 10.0, size=(20, 2))
    expected = min(
        (signed_distance(world, obstacle.id, point), obstacle.id, i)
        for obstacle in world.obstacles
        for i, point in enumerate(points)
    )
    value, obstacle_id, index = min_clearance(world, points)
    assert value == pytest.approx(expected[0])
    assert (obstacle_id, index) == expected[1:]


def test_min_clearance_rejects_empty_points(unit_circle_world):
    with pytest.raises(DimensionError):
        min_clearance(unit_circle_world, np.empty((0, 2)))


def test_inflated_world_shifts_every_distance(unit_circle_world):
    points = np.array([[2.0, 0.0], [0.0, 3.0]])
    shifted = clearance_matrix(unit_circle_world.inflated(0.25), points)
    np.testing.assert_allclose(shifted, clearance_matrix(unit_circle_world, points) - 0.25)


def test_polygon_must_be_convex():
    with pytest.raises(ValueError):
        ConvexPolygon(vertices=((0.0, 0.0), (2.0, 0.0), (1.0, 0.5), (2.0, 2.0), (0.0, 2.0)))


def test_duplicate_obstacle_ids_rejected():
    circle = Circle(center=(0.0, 0.0), radius=1.0)
    with pytest.raises(ValueError):
        World(obstacles=(Obstacle(id=1, shape=circle), Obstacle(id=1, shape=circle)))
