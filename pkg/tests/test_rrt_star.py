import numpy as np
import pytest

from app.planner.models import Circle, ConvexPolygon, Obstacle, RRTConfig, Tree, World
from app.planner.services.rrt_star import (
    RRTStarService,
    config_collision_free,
    edge_collision_free,
    extend,
    grow_tree,
)
from app.planner.utils.errors import (
    DegeneratePathError,
    InfeasibleEndpointError,
    PathNotFoundError,
)
from tests.conftest import random_world


def _recomputed_cost(tree: Tree, index: int) -> float:
    path = tree.configs[tree.root_path(index)]
    return float(np.linalg.norm(np.diff(path, axis=0), axis=1).sum())


def test_straight_line_in_empty_world(point_mass):
    world = World(bounds=(-0.5, -0.5, 10.5, 0.5))
    cfg = RRTConfig(n_samples=4000, n_trees=4, steer_step=1.0, edge_check_resolution=0.1)
    path = RRTStarService(threads=2).plan(world, point_mass, (0.0, 0.0), (10.0, 0.0), cfg)

    np.testing.assert_allclose(path.start, (0.0, 0.0))
    np.testing.assert_allclose(path.goal, (10.0, 0.0))
    assert 10.0 <= path.length <= 10.0 + 2 * cfg.steer_step


def test_wall_with_gap_forces_detour(point_mass):
    wall = ConvexPolygon(vertices=((4.5, 0.0), (5.5, 0.0), (5.5, 8.0), (4.5, 8.0)))
    world = World(obstacles=(Obstacle(id=0, shape=wall),), bounds=(0.0, 0.0, 10.0, 10.0))
    cfg = RRTConfig(n_samples=4000, n_trees=4, steer_step=0.5)
    path = RRTStarService(threads=2).plan(world, point_mass, (1.0, 2.0), (9.0, 2.0), cfg)

    assert path.length > 8.0
    for a, b in zip(path.waypoints, path.waypoints[1:]):
        assert edge_collision_free(world, point_mass, a, b, cfg.edge_check_resolution)


def test_goal_inside_obstacle_is_rejected(point_mass, unit_circle_world):
    cfg = RRTConfig(n_samples=10)
    with pytest.raises(InfeasibleEndpointError):
        RRTStarService().plan(unit_circle_world, point_mass, (3.0, 3.0), (0.0, 0.0), cfg)


def test_identical_endpoints_are_degenerate(point_mass, empty_world):
    with pytest.raises(DegeneratePathError):
        RRTStarService().plan(empty_world, point_mass, (1.0, 1.0), (1.0, 1.0), RRTConfig())


def test_unreachable_goal_exhausts_batches(point_mass):
    ring = tuple(
        Obstacle(id=i, shape=Circle(center=(5.0 + 1.2 * np.cos(a), 5.0 + 1.2 * np.sin(a)), radius=0.5))
        for i, a in enumerate(np.linspace(0.0, 2 * np.pi, 16, endpoint=False))
    )
    world = World(obstacles=ring, bounds=(0.0, 0.0, 10.0, 10.0))
    cfg = RRTConfig(n_samples=50, n_trees=2, max_batches=2)
    with pytest.raises(PathNotFoundError):
        RRTStarService().plan(world, point_mass, (1.0, 1.0), (5.0, 5.0), cfg)


def test_same_seed_gives_same_path(point_mass, blocked_world):
    cfg = RRTConfig(n_samples=2000, n_trees=3, seed=11)
    service = RRTStarService(threads=3)
    first = service.plan(blocked_world, point_mass, (0.5, 5.0), (9.5, 5.0), cfg)
    second = service.plan(blocked_world, point_mass, (0.5, 5.0), (9.5, 5.0), cfg)
    np.testing.assert_array_equal(first.waypoints, second.waypoints)


def test_extend_clamps_to_steer_step(point_mass, empty_world):
    tree = Tree((0.0, 0.0))
    cfg = RRTConfig(steer_step=1.0, edge_check_resolution=0.1)
    extend(tree, (5.0, 0.0), empty_world, point_mass, cfg)

    assert len(tree) == 2
    np.testing.assert_allclose(tree.config(1), (1.0, 0.0))
    assert tree.cost(1) == pytest.approx(1.0)
    assert tree.parents[1] == 0


def test_blocked_extend_leaves_tree_unchanged(point_mass):
    world = World(obstacles=(Obstacle(id=0, shape=Circle(center=(0.5, 0.0), radius=0.2)),))
    tree = Tree((0.0, 0.0))
    extend(tree, (0.9, 0.0), world, point_mass, RRTConfig(steer_step=1.0))
    assert len(tree) == 1


def test_costs_match_root_paths_after_rewiring(point_mass, empty_world, rng):
    tree = Tree((5.0, 5.0))
    cfg = RRTConfig(steer_step=1.5, edge_check_resolution=0.1, rewire_gamma=6.0)
    for sample in rng.uniform(0.0, 10.0, size=(200, 2)):
        extend(tree, sample, empty_world, point_mass, cfg)

    for index in range(len(tree)):
        assert tree.cost(index) == pytest.approx(_recomputed_cost(tree, index), abs=1e-9)
        if index:
            assert tree.parents[index] is not None


def test_nearest_node_is_rewired_through_cheaper_new_node(point_mass, empty_world):
    tree = Tree((0.0, 0.0))
    detour = tree.add(np.array([0.0, -0.9]), 0, 0.9)
    expensive = tree.add(np.array([1.0, 1.0]), detour, 0.9 + float(np.hypot(1.0, 1.9)))
    tree.add(np.array([0.0, 1.0]), 0, 1.0)
    cfg = RRTConfig(steer_step=1.0, rewire_gamma=2.0, edge_check_resolution=0.05)

    extend(tree, (0.8, 1.0), empty_world, point_mass, cfg)

    assert tree.parents[4] == 3
    assert tree.parents[expensive] == 4
    assert tree.cost(expensive) == pytest.approx(2.0)


def test_node_costs_never_increase_while_growing(point_mass, rng):
    world = World(
        obstacles=(
            Obstacle(id=0, shape=Circle(center=(5.0, 5.0), radius=1.5)),
            Obstacle(id=1, shape=Circle(center=(2.0, 7.0), radius=1.0)),
        ),
        bounds=(0.0, 0.0, 10.0, 10.0),
    )
    tree = Tree((0.2, 0.2))
    cfg = RRTConfig(steer_step=1.0, edge_check_resolution=0.05, rewire_gamma=4.0)
    costs: list[float] = []
    for sample in rng.uniform(0.0, 10.0, size=(400, 2)):
        extend(tree, sample, world, point_mass, cfg)
        current = [tree.cost(i) for i in range(len(costs))]
        assert all(now <= before + 1e-12 for now, before in zip(current, costs))
        costs = [tree.cost(i) for i in range(len(tree))]
    assert len(tree) > 50


def test_best_route_to_goal_only_improves(point_mass, blocked_world, rng):
    tree = Tree((0.5, 5.0))
    goal = np.array([9.5, 5.0])
    cfg = RRTConfig(steer_step=1.0, edge_check_resolution=0.05, rewire_gamma=4.0)
    history: list[float] = []
    reaches: list[bool] = []
    for sample in rng.uniform(0.0, 10.0, size=(600, 2)):
        extend(tree, sample, blocked_world, point_mass, cfg)
        for config in tree.configs[len(reaches) :]:
            reaches.append(edge_collision_free(blocked_world, point_mass, config, goal, 0.05))
        routes = [
            tree.cost(i) + float(np.linalg.norm(goal - tree.configs[i]))
            for i in np.flatnonzero(reaches)
        ]
        history.append(min(routes, default=np.inf))

    assert np.isfinite(history[-1])
    assert all(now <= before + 1e-12 for before, now in zip(history, history[1:]))
    assert history[-1] < next(cost for cost in history if np.isfinite(cost))


def test_edge_checks(point_mass, empty_world, unit_circle_world):
    assert edge_collision_free(empty_world, point_mass, (-5.0, 0.0), (5.0, 0.0), 0.1)
    assert not edge_collision_free(unit_circle_world, point_mass, (-2.0, 0.0), (2.0, 0.0), 0.1)
    assert config_collision_free(unit_circle_world, point_mass, (2.0, 0.0))
    with pytest.raises(ValueError):
        edge_collision_free(empty_world, point_mass, (0.0, 0.0), (1.0, 0.0), 0.0)


def test_edge_checks_agree_with_dense_sampling(point_mass, rng):
    world = random_world(rng, 4)
    resolution = 0.1
    for a, b in rng.uniform(0.0, 10.0, size=(1000, 2, 2)):
        dense = np.linspace(a, b, int(np.linalg.norm(b - a) / (resolution / 10)) + 2)
        clearances = np.stack([o.signed_distance(dense) for o in world.obstacles])
        true_min = clearances.min()
        if -resolution < true_min < 0:
            continue
        assert edge_collision_free(world, point_mass, a, b, resolution) == (true_min >= 0)


def test_arm_tree_reaches_goal(make_arm):
    arm = make_arm(n_joints=2)
    world = World(
        obstacles=(Obstacle(id=0, shape=Circle(center=(1.2, 1.2), radius=0.3)),),
        bounds=(-3.0, -3.0, 3.0, 3.0),
    )
    cfg = RRTConfig(n_samples=3000, steer_step=0.3, edge_check_resolution=0.05)
    path = grow_tree(
        world.inflated(arm.collision_radius),
        arm,
        np.array([0.0, 0.0]),
        np.array([2.0, 0.0]),
        cfg,
        seed=3,
    )
    assert path is not None
    np.testing.assert_allclose(path.goal, (2.0, 0.0))
