from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from app.planner.models.robot import RobotModel
from app.planner.models.rrt import RRTConfig
from app.planner.models.sopt import SoptConfig
from app.planner.models.world import World


@dataclass(frozen=True)
class Scenario:
    world: World
    robot: RobotModel
    start: tuple[float, ...]
    goal: tuple[float, ...]
    rrt: RRTConfig = field(default_factory=RRTConfig)
    sopt: SoptConfig = field(default_factory=SoptConfig)
    name: str = "scenario"

    @property
    def start_config(self) -> np.ndarray:
        return np.asarray(self.start, dtype=float)

    @property
    def goal_config(self) -> np.ndarray:
        return np.asarray(self.goal, dtype=float)

    def with_planner(
        self, rrt: RRTConfig | None = None, sopt: SoptConfig | None = None
    ) -> Scenario:
        return replace(self, rrt=rrt or self.rrt, sopt=sopt or self.sopt)

    @classmethod
    def from_dict(cls, data: dict[str, Any], name: str = "scenario") -> Scenario:
        planner = data.get("planner") or {}
        return cls(
            world=World.from_dict(data["world"]),
            robot=RobotModel.from_dict(data["robot"]),
            start=tuple(float(v) for v in data["start"]),
            goal=tuple(float(v) for v in data["goal"]),
            rrt=RRTConfig.from_dict(planner.get("rrt") or {}),
            sopt=SoptConfig.from_dict(planner.get("sopt") or {}),
            name=name,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "world": self.world.to_dict(),
            "robot": self.robot.to_dict(),
            "start": list(self.start),
            "goal": list(self.goal),
            "planner": {"rrt": self.rrt.to_dict(), "sopt": self.sopt.to_dict()},
        }
