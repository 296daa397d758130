from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from app.planner.utils.constants import RobotKind


@dataclass(frozen=True)
class RobotModel:
    """Discrete-time kinematic model z' = A z + B u with workspace collision proxies."""

    dt: float
    input_bounds: tuple[tuple[float, float], ...]

    kind: RobotKind = field(init=False, default=RobotKind.POINT_MASS_2D)

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}.")
        if len(self.input_bounds) != self.input_dim:
            raise ValueError(
                f"{self.kind.value} expects {self.input_dim} input bounds, "
                f"got {len(self.input_bounds)}."
            )
        for lower, upper in self.input_bounds:
            if not lower < upper:
                raise ValueError(f"Input bound ({lower}, {upper}) needs lower < upper.")

    @property
    def state_dim(self) -> int:
        raise NotImplementedError

    @property
    def input_dim(self) -> int:
        raise NotImplementedError

    @property
    def config_dim(self) -> int:
        raise NotImplementedError

    @property
    def collision_radius(self) -> float:
        return 0.0

    @property
    def lever_arm(self) -> float:
        """Upper bound on workspace displacement per unit configuration displacement."""
        return 1.0

    @property
    def n_collision_points(self) -> int:
        raise NotImplementedError

    @cached_property
    def transition(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @cached_property
    def lower_bounds(self) -> np.ndarray:
        return np.array([lower for lower, _ in self.input_bounds])

    @cached_property
    def upper_bounds(self) -> np.ndarray:
        return np.array([upper for _, upper in self.input_bounds])

    def advance(self, z: np.ndarray, u: np.ndarray) -> np.ndarray:
        a, b = self.transition
        return a @ z + b @ u

    def rollout_states(self, z0: np.ndarray, inputs: np.ndarray) -> np.ndarray:
        states = np.empty((len(inputs), self.state_dim))
        z = np.asarray(z0, dtype=float)
        for t, u in enumerate(inputs):
            z = self.advance(z, u)
            states[t] = z
        return states

    def configuration_of(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float)[..., : self.config_dim]

    def state_of(self, configuration: Any) -> np.ndarray:
        raise NotImplementedError

    def sampling_box(self, bounds: tuple[float, float, float, float]) -> np.ndarray:
        raise NotImplementedError

    def states_along(self, configurations: np.ndarray) -> np.ndarray:
        """States for a configuration sequence sampled every dt."""
        raise NotImplementedError

    def difference_inputs(self, waypoints: np.ndarray) -> np.ndarray:
        """Inputs recovered from a waypoint sequence by inverse kinematic differencing."""
        raise NotImplementedError

    def collision_points_batch(self, configurations: np.ndarray) -> np.ndarray:
        """Workspace points with shape (configurations, points, 2)."""
        raise NotImplementedError

    def collision_points_jacobian(self, z: np.ndarray) -> np.ndarray:
        """Jacobians with shape (points, 2, state_dim)."""
        raise NotImplementedError

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RobotModel:
        kind = RobotKind.from_str(data.get("kind", RobotKind.POINT_MASS_2D.value))
        bounds = tuple(tuple(float(v) for v in pair) for pair in data["input_bounds"])
        if kind is RobotKind.POINT_MASS_2D:
            return PointMass2D(dt=float(data["dt"]), input_bounds=bounds)
        n_joints = int(data["n_joints"])
        limits = data.get("joint_limits") or [[-math.pi, math.pi]] * n_joints
        return PlanarArm(
            dt=float(data["dt"]),
            input_bounds=bounds,
            n_joints=n_joints,
            link_lengths=tuple(float(v) for v in data["link_lengths"]),
            base=tuple(float(v) for v in data.get("base", (0.0, 0.0))),
            spheres_per_link=int(data.get("spheres_per_link", 2)),
            sphere_radius=float(data.get("sphere_radius", 0.05)),
            joint_limits=tuple(tuple(float(v) for v in pair) for pair in limits),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "dt": self.dt,
            "input_bounds": [list(pair) for pair in self.input_bounds],
        }


@dataclass(frozen=True)
class PointMass2D(RobotModel):
    """Position state, velocity input."""

    kind: RobotKind = field(init=False, default=RobotKind.POINT_MASS_2D)

    @property
    def state_dim(self) -> int:
        return 2

    @property
    def input_dim(self) -> int:
        return 2

    @property
    def config_dim(self) -> int:
        return 2

    @property
    def n_collision_points(self) -> int:
        return 1

    @cached_property
    def transition(self) -> tuple[np.ndarray, np.ndarray]:
        return np.eye(2), self.dt * np.eye(2)

    def state_of(self, configuration: Any) -> np.ndarray:
        return np.asarray(configuration, dtype=float).copy()

    def sampling_box(self, bounds: tuple[float, float, float, float]) -> np.ndarray:
        xmin, ymin, xmax, ymax = bounds
        return np.array([[xmin, xmax], [ymin, ymax]])

    def states_along(self, configurations: np.ndarray) -> np.ndarray:
        return np.asarray(configurations, dtype=float).copy()

    def difference_inputs(self, waypoints: np.ndarray) -> np.ndarray:
        return np.diff(np.asarray(waypoints, dtype=float), axis=0) / self.dt

    def collision_points_batch(self, configurations: np.ndarray) -> np.ndarray:
        return np.asarray(configurations, dtype=float).reshape(-1, 1, 2)

    def collision_points_jacobian(self, z: np.ndarray) -> np.ndarray:
        return np.eye(2)[None, :, :]


@dataclass(frozen=True)
class PlanarArm(RobotModel):
    """Planar serial chain; state (angles, rates), input joint accelerations."""

    n_joints: int = 5
    link_lengths: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0)
    base: tuple[float, float] = (0.0, 0.0)
    spheres_per_link: int = 2
    sphere_radius: float = 0.05
    joint_limits: tuple[tuple[float, float], ...] = ()

    kind: RobotKind = field(init=False, default=RobotKind.PLANAR_ARM)

    def __post_init__(self) -> None:
        if self.n_joints < 1:
            raise ValueError("Planar arm needs at least one joint.")
        if len(self.link_lengths) != self.n_joints or min(self.link_lengths) <= 0:
            raise ValueError("Planar arm needs one positive link length per joint.")
        if self.spheres_per_link < 1 or not self.sphere_radius > 0:
            raise ValueError("Planar arm needs spheres_per_link >= 1 and sphere_radius > 0.")
        if not self.joint_limits:
            object.__setattr__(self, "joint_limits", ((-math.pi, math.pi),) * self.n_joints)
        if len(self.joint_limits) != self.n_joints:
            raise ValueError("Planar arm needs one joint limit pair per joint.")
        super().__post_init__()

    @property
    def state_dim(self) -> int:
        return 2 * self.n_joints

    @property
    def input_dim(self) -> int:
        return self.n_joints

    @property
    def config_dim(self) -> int:
        return self.n_joints

    @property
    def collision_radius(self) -> float:
        return self.sphere_radius

    @property
    def lever_arm(self) -> float:
        return float(sum(self.link_lengths))

    @property
    def n_collision_points(self) -> int:
        return self.n_joints * self.spheres_per_link

    @cached_property
    def transition(self) -> tuple[np.ndarray, np.ndarray]:
        n, dt = self.n_joints, self.dt
        a = np.eye(2 * n)
        a[:n, n:] = dt * np.eye(n)
        b = np.zeros((2 * n, n))
        b[n:, :] = dt * np.eye(n)
        return a, b

    @cached_property
    def _fractions(self) -> np.ndarray:
        return np.arange(1, self.spheres_per_link + 1) / self.spheres_per_link

    def state_of(self, configuration: Any) -> np.ndarray:
        return np.concatenate([np.asarray(configuration, dtype=float), np.zeros(self.n_joints)])

    def sampling_box(self, bounds: tuple[float, float, float, float]) -> np.ndarray:
        return np.asarray(self.joint_limits, dtype=float)

    def states_along(self, configurations: np.ndarray) -> np.ndarray:
        # rest at both ends, forward-difference rates in between
        theta = np.asarray(configurations, dtype=float)
        omega = np.zeros_like(theta)
        omega[1:-1] = np.diff(theta, axis=0)[1:] / self.dt
        return np.hstack([theta, omega])

    def difference_inputs(self, waypoints: np.ndarray) -> np.ndarray:
        waypoints = np.asarray(waypoints, dtype=float)
        n = self.n_joints
        theta = waypoints[:, :n]
        rates = np.diff(theta, axis=0) / self.dt
        omega = np.vstack([waypoints[:1, n:], rates[1:], waypoints[-1:, n:]])
        return np.diff(omega, axis=0) / self.dt

    def _joints(self, configurations: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Absolute link headings and joint origins, each (m, n_joints[, 2])."""
        headings = np.cumsum(configurations, axis=1)
        directions = np.stack([np.cos(headings), np.sin(headings)], axis=2)
        links = directions * np.asarray(self.link_lengths)[None, :, None]
        tips = np.asarray(self.base) + np.cumsum(links, axis=1)
        origins = np.concatenate(
            [np.broadcast_to(np.asarray(self.base), (len(configurations), 1, 2)), tips[:, :-1]],
            axis=1,
        )
        return links, origins

    def joint_positions(self, configurations: np.ndarray) -> np.ndarray:
        """Base, joints and tip as (m, n_joints + 1, 2) polylines."""
        configurations = np.asarray(configurations, dtype=float).reshape(-1, self.n_joints)
        links, origins = self._joints(configurations)
        return np.concatenate([origins, origins[:, -1:] + links[:, -1:]], axis=1)

    def collision_points_batch(self, configurations: np.ndarray) -> np.ndarray:
        configurations = np.asarray(configurations, dtype=float).reshape(-1, self.n_joints)
        links, origins = self._joints(configurations)
        points = (
            origins[:, :, None, :] + self._fractions[None, None, :, None] * links[:, :, None, :]
        )
        return points.reshape(len(configurations), -1, 2)

    def collision_points_jacobian(self, z: np.ndarray) -> np.ndarray:
        theta = self.configuration_of(z).reshape(1, -1)
        _, origins = self._joints(theta)
        points = self.collision_points_batch(theta)[0]
        link_of_point = np.repeat(np.arange(self.n_joints), self.spheres_per_link)

        jacobians = np.zeros((len(points), 2, self.state_dim))
        for k in range(self.n_joints):
            lever = points - origins[0, k]
            moved = link_of_point >= k
            jacobians[moved, 0, k] = -lever[moved, 1]
            jacobians[moved, 1, k] = lever[moved, 0]
        return jacobians

    def to_dict(self) -> dict[str, Any]:
        return {
            **super().to_dict(),
            "n_joints": self.n_joints,
            "link_lengths": list(self.link_lengths),
            "base": list(self.base),
            "spheres_per_link": self.spheres_per_link,
            "sphere_radius": self.sphere_radius,
            "joint_limits": [list(pair) for pair in self.joint_limits],
        }


class Trajectory:
    """Inputs over a horizon with the rollout states kept in sync."""

    def __init__(
        self,
        model: RobotModel,
        z0: Any,
        inputs: Any,
        reference: np.ndarray | None = None,
    ) -> None:
        self.model = model
        self.z0 = np.asarray(z0, dtype=float).copy()
        self.reference = reference
        self.inputs = inputs

    def __str__(self) -> str:
        return (
            f"Trajectory(kind={self.model.kind.value}, steps={self.steps}, "
            f"horizon={self.horizon})"
        )

    @property
    def inputs(self) -> np.ndarray:
        return self._inputs

    @inputs.setter
    def inputs(self, value: Any) -> None:
        inputs = np.asarray(value, dtype=float).reshape(-1, self.model.input_dim).copy()
        if len(inputs) < 1:
            raise ValueError("Trajectory needs at least one step.")
        inputs.setflags(write=False)
        self._inputs = inputs
        self._states = self.model.rollout_states(self.z0, inputs)
        self._states.setflags(write=False)

    @property
    def states(self) -> np.ndarray:
        return self._states

    @property
    def steps(self) -> int:
        return len(self._inputs)

    @property
    def horizon(self) -> int:
        """Waypoint count H, start included."""
        return self.steps + 1

    @property
    def waypoints(self) -> np.ndarray:
        return np.vstack([self.z0, self._states])

    @property
    def stacked_inputs(self) -> np.ndarray:
        return self._inputs.reshape(-1)

    @property
    def stacked_states(self) -> np.ndarray:
        return self._states.reshape(-1)

    def state_at(self, index: int) -> np.ndarray:
        return self.z0 if index == 0 else self._states[index - 1]

    def copy(self) -> Trajectory:
        return Trajectory(self.model, self.z0, self._inputs, self.reference)
