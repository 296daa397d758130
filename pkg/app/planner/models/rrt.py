from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Any

import numpy as np

from app.planner.utils.constants import (
    DEFAULT_EDGE_CHECK_RESOLUTION,
    DEFAULT_GOAL_BIAS,
    DEFAULT_MAX_BATCHES,
    DEFAULT_N_SAMPLES,
    DEFAULT_N_TREES,
    DEFAULT_REWIRE_GAMMA,
    DEFAULT_SEED,
    DEFAULT_STEER_STEP,
)


@dataclass(frozen=True)
class RRTConfig:
    n_samples: int = DEFAULT_N_SAMPLES
    n_trees: int = DEFAULT_N_TREES
    steer_step: float = DEFAULT_STEER_STEP
    goal_bias: float = DEFAULT_GOAL_BIAS
    rewire_gamma: float = DEFAULT_REWIRE_GAMMA
    edge_check_resolution: float = DEFAULT_EDGE_CHECK_RESOLUTION
    seed: int = DEFAULT_SEED
    max_batches: int = DEFAULT_MAX_BATCHES

    def __post_init__(self) -> None:
        if self.n_samples < 1 or self.n_trees < 1 or self.max_batches < 1:
            raise ValueError("n_samples, n_trees and max_batches must be >= 1.")
        if not (self.steer_step > 0 and self.rewire_gamma > 0):
            raise ValueError("steer_step and rewire_gamma must be > 0.")
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must lie in [0, 1].")
        if not 0 < self.edge_check_resolution <= self.steer_step:
            raise ValueError("edge_check_resolution must lie in (0, steer_step].")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RRTConfig:
        names = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in names})

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


class Tree:
    """RRT* tree over configurations; node 0 is the root."""

    def __init__(self, root: Any, capacity: int = 256) -> None:
        root = np.asarray(root, dtype=float)
        self._configs = np.empty((max(capacity, 1), root.size))
        self._configs[0] = root
        self._costs = np.zeros(max(capacity, 1))
        self.parents: list[int | None] = [None]
        self.children: list[set[int]] = [set()]

    def __len__(self) -> int:
        return len(self.parents)

    @property
    def dim(self) -> int:
        return self._configs.shape[1]

    @property
    def configs(self) -> np.ndarray:
        return self._configs[: len(self)]

    @property
    def costs(self) -> np.ndarray:
        return self._costs[: len(self)]

    def config(self, index: int) -> np.ndarray:
        return self._configs[index]

    def cost(self, index: int) -> float:
        return float(self._costs[index])

    def add(self, config: np.ndarray, parent: int, cost: float) -> int:
        index = len(self)
        if index == len(self._configs):
            self._configs = np.vstack([self._configs, np.empty_like(self._configs)])
            self._costs = np.concatenate([self._costs, np.empty_like(self._costs)])
        self._configs[index] = config
        self._costs[index] = cost
        self.parents.append(parent)
        self.children.append(set())
        self.children[parent].add(index)
        return index

    def reparent(self, index: int, parent: int, cost: float) -> None:
        old_parent = self.parents[index]
        if old_parent is not None:
            self.children[old_parent].discard(index)
        self.parents[index] = parent
        self.children[parent].add(index)
        self._costs[index] = cost
        stack = list(self.children[index])
        while stack:
            node = stack.pop()
            above = self.parents[node]
            self._costs[node] = self._costs[above] + self.edge_length(node, above)
            stack.extend(self.children[node])

    def edge_length(self, a: int, b: int) -> float:
        return float(np.linalg.norm(self._configs[a] - self._configs[b]))

    def root_path(self, index: int) -> list[int]:
        path = [index]
        while (parent := self.parents[path[-1]]) is not None:
            path.append(parent)
        return path[::-1]


@dataclass
class Path:
    waypoints: np.ndarray

    def __post_init__(self) -> None:
        self.waypoints = np.asarray(self.waypoints, dtype=float)
        if self.waypoints.ndim != 2 or len(self.waypoints) < 2:
            raise ValueError("Path needs at least two configuration waypoints.")

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1).sum())

    @property
    def start(self) -> np.ndarray:
        return self.waypoints[0]

    @property
    def goal(self) -> np.ndarray:
        return self.waypoints[-1]
