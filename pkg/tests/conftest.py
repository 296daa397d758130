import numpy as np
import pytest

from app.planner.models import (
    Circle,
    ConvexPolygon,
    Obstacle,
    PlanarArm,
    PointMass2D,
    RRTConfig,
    SoptConfig,
    World,
)


@pytest.fixture
def point_mass() -> PointMass2D:
    return PointMass2D(dt=0.1, input_bounds=((-2.0, 2.0), (-2.0, 2.0)))


@pytest.fixture
def make_arm():
    def factory(n_joints: int = 2, link_length: float = 1.0, **kwargs) -> PlanarArm:
        return PlanarArm(
            dt=0.1,
            input_bounds=((-5.0, 5.0),) * n_joints,
            n_joints=n_joints,
            link_lengths=(link_length,) * n_joints,
            **kwargs,
        )

    return factory


@pytest.fixture
def empty_world() -> World:
    return World(bounds=(-1.0, -1.0, 11.0, 11.0))


@pytest.fixture
def unit_circle_world() -> World:
    return World(obstacles=(Obstacle(id=0, shape=Circle(center=(0.0, 0.0), radius=1.0)),))


@pytest.fixture
def square() -> ConvexPolygon:
    return ConvexPolygon(vertices=((-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)))


@pytest.fixture
def blocked_world() -> World:
    """A circle sitting on the straight line from (0, 5) to (10, 5)."""
    return World(
        obstacles=(Obstacle(id=0, shape=Circle(center=(5.0, 5.0), radius=1.0)),),
        bounds=(0.0, 0.0, 10.0, 10.0),
    )


@pytest.fixture
def sopt_config() -> SoptConfig:
    return SoptConfig(n_segments=5, desired_speed=1.0, max_iterations=20)


@pytest.fixture
def rrt_config() -> RRTConfig:
    return RRTConfig(n_samples=3000, n_trees=4, steer_step=0.5, seed=0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def random_world(rng: np.random.Generator, count: int, bounds=(0.0, 0.0, 10.0, 10.0)) -> World:
    xmin, ymin, xmax, ymax = bounds
    obstacles = tuple(
        Obstacle(
            id=i,
            shape=Circle(
                center=(float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax))),
                radius=float(rng.uniform(0.3, 1.0)),
            ),
        )
        for i in range(count)
    )
    return World(obstacles=obstacles, bounds=bounds)


# empty 10 x 2 corridor, small enough for end-to-end runs
CORRIDOR = {
    "world": {"bounds": [0, 0, 10, 2], "obstacles": []},
    "robot": {"kind": "point_mass_2d", "dt": 0.1, "input_bounds": [[-2, 2], [-2, 2]]},
    "start": [0.5, 1.0],
    "goal": [9.5, 1.0],
    "planner": {
        "rrt": {"n_samples": 600, "n_trees": 2, "steer_step": 1.0, "edge_check_resolution": 0.1},
    },
}
