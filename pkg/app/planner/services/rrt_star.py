import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any

import numpy as np

from app.planner.models import Path, RobotModel, RRTConfig, Tree, World
from app.planner.services.world import clearance_matrix
from app.planner.utils.errors import (
    DegeneratePathError,
    InfeasibleEndpointError,
    PathNotFoundError,
)

logger = logging.getLogger(__name__)


def _configs_clear(world: World, model: RobotModel, configurations: np.ndarray) -> bool:
    if not world.obstacles:
        return True
    points = model.collision_points_batch(configurations).reshape(-1, 2)
    return bool(clearance_matrix(world, points).min() >= 0)


def _edge_clear(
    world: World, model: RobotModel, a: np.ndarray, b: np.ndarray, resolution: float
) -> bool:
    if not world.obstacles:
        return True
    count = int(math.ceil(np.linalg.norm(b - a) / resolution)) + 1
    samples = np.linspace(a, b, max(count, 2))
    return _configs_clear(world, model, samples)


def config_collision_free(world: World, model: RobotModel, configuration: Any) -> bool:
    configuration = np.asarray(configuration, dtype=float).reshape(1, -1)
    return _configs_clear(world.inflated(model.collision_radius), model, configuration)


def edge_collision_free(
    world: World, model: RobotModel, a: Any, b: Any, resolution: float
) -> bool:
    """True iff every configuration sampled along a->b (spacing <= resolution) is clear."""
    if not resolution > 0:
        raise ValueError(f"resolution must be > 0, got {resolution}.")
    return _edge_clear(
        world.inflated(model.collision_radius),
        model,
        np.asarray(a, dtype=float),
        np.asarray(b, dtype=float),
        resolution,
    )


def _near_radius(cfg: RRTConfig, n: int, dim: int) -> float:
    if n < 2:
        return cfg.steer_step
    return min(cfg.steer_step, cfg.rewire_gamma * (math.log(n) / n) ** (1.0 / dim))


def _extend(
    tree: Tree, sample: np.ndarray, world: World, model: RobotModel, cfg: RRTConfig
) -> int | None:
    """Grow `tree` toward `sample`; `world` must already carry the robot inflation."""
    configs = tree.configs
    distances = np.linalg.norm(configs - sample, axis=1)
    nearest = int(np.argmin(distances))
    if distances[nearest] == 0:
        return None

    direction = sample - configs[nearest]
    new = configs[nearest] + direction * min(1.0, cfg.steer_step / distances[nearest])
    if not _edge_clear(world, model, configs[nearest], new, cfg.edge_check_resolution):
        return None

    radius = _near_radius(cfg, len(tree), tree.dim)
    gaps = np.linalg.norm(configs - new, axis=1)
    near = np.union1d(np.flatnonzero(gaps <= radius), [nearest])
    totals = tree.costs[near] + gaps[near]

    parent = nearest
    best = tree.cost(nearest) + float(gaps[nearest])
    for position in np.argsort(totals, kind="stable"):
        candidate = int(near[position])
        if totals[position] >= best:
            break
        if _edge_clear(world, model, configs[candidate], new, cfg.edge_check_resolution):
            parent = candidate
            break

    index = tree.add(new, parent, tree.cost(parent) + float(np.linalg.norm(new - configs[parent])))

    for neighbour in near.tolist():
        if neighbour == parent:
            continue
        through_new = tree.cost(index) + tree.edge_length(index, neighbour)
        if through_new < tree.cost(neighbour) and _edge_clear(
            world, model, tree.config(index), tree.config(neighbour), cfg.edge_check_resolution
        ):
            tree.reparent(neighbour, index, through_new)
    return index


def extend(tree: Tree, sample: Any, world: World, model: RobotModel, cfg: RRTConfig) -> Tree:
    """One RRT* extend-and-rewire step; a blocked extension leaves the tree unchanged."""
    _extend(
        tree,
        np.asarray(sample, dtype=float),
        world.inflated(model.collision_radius),
        model,
        cfg,
    )
    return tree


def grow_tree(
    world: World,
    model: RobotModel,
    start: np.ndarray,
    goal: np.ndarray,
    cfg: RRTConfig,
    seed: int,
) -> Path | None:
    """Sample until the first goal connection or until n_samples are spent."""
    rng = np.random.default_rng(seed)
    box = model.sampling_box(world.bounds)
    tree = Tree(start, capacity=min(cfg.n_samples + 1, 4096))

    def connect(index: int) -> Path | None:
        config = tree.config(index)
        gap = float(np.linalg.norm(goal - config))
        if gap > cfg.steer_step:
            return None
        if gap > 0 and not _edge_clear(world, model, config, goal, cfg.edge_check_resolution):
            return None
        waypoints = tree.configs[tree.root_path(index)]
        if gap > 0:
            waypoints = np.vstack([waypoints, goal])
        return Path(waypoints=waypoints)

    if (path := connect(0)) is not None:
        return path

    for _ in range(cfg.n_samples):
        if rng.random() < cfg.goal_bias:
            sample = goal
        else:
            sample = rng.uniform(box[:, 0], box[:, 1])
        index = _extend(tree, sample, world, model, cfg)
        if index is not None and (path := connect(index)) is not None:
            return path
    return None


class RRTStarService:
    """Parallel multi-tree RRT*: pick the shortest path of the first successful batch."""

    def __init__(self, threads: int = 1) -> None:
        self.threads = max(1, threads)
        logger.debug(f"RRT* service initialized with {self.threads} worker threads.")

    def plan(
        self,
        world: World,
        model: RobotModel,
        start: Any,
        goal: Any,
        cfg: RRTConfig,
    ) -> Path:
        start = np.asarray(start, dtype=float)
        goal = np.asarray(goal, dtype=float)
        if np.array_equal(start, goal):
            raise DegeneratePathError("Start and goal configurations coincide.")

        inflated = world.inflated(model.collision_radius)
        for name, configuration in (("start", start), ("goal", goal)):
            if not _configs_clear(inflated, model, configuration.reshape(1, -1)):
                raise InfeasibleEndpointError(f"The {name} configuration is in collision.")

        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            for batch in range(cfg.max_batches):
                offset = batch * cfg.n_trees
                seeds = [cfg.seed + offset + i for i in range(cfg.n_trees)]
                paths = list(
                    executor.map(
                        lambda seed: grow_tree(inflated, model, start, goal, cfg, seed), seeds
                    )
                )
                found = [(path.length, i, path) for i, path in enumerate(paths) if path]
                if found:
                    length, tree_index, path = min(found, key=lambda item: (item[0], item[1]))
                    logger.info(
                        f"RRT* batch {batch + 1}: {len(found)}/{cfg.n_trees} trees reached the "
                        f"goal, best length {length:.3f} from tree {tree_index}."
                    )
                    return path
                logger.warning(f"RRT* batch {batch + 1} found no path, reseeding.")

        raise PathNotFoundError(f"No path found after {cfg.max_batches} batches.")
