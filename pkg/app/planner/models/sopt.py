from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

import numpy as np

from app.planner.models.robot import Trajectory
from app.planner.utils.constants import (
    DEFAULT_DESIRED_SPEED,
    DEFAULT_EPS_SCALE,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_N_SEGMENTS,
    DEFAULT_Q_WEIGHT,
    DEFAULT_R_WEIGHT,
    SplitMode,
)


@dataclass(frozen=True)
class SoptConfig:
    n_segments: int = DEFAULT_N_SEGMENTS
    desired_speed: float = DEFAULT_DESIRED_SPEED
    eps_scale: float = DEFAULT_EPS_SCALE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    Q_weight: float = DEFAULT_Q_WEIGHT
    R_weight: float = DEFAULT_R_WEIGHT
    auto_merge: bool = False
    obstacle_margin: float | None = None
    resample: bool = True
    qp_tolerance: float | None = None
    qp_max_iter: int | None = None

    def __post_init__(self) -> None:
        if self.n_segments < 1:
            raise ValueError(f"n_segments must be >= 1, got {self.n_segments}.")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}.")
        for name in ("desired_speed", "eps_scale", "Q_weight", "R_weight"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}.")
        if self.obstacle_margin is not None and not self.obstacle_margin > 0:
            raise ValueError(f"obstacle_margin must be > 0, got {self.obstacle_margin}.")
        if self.qp_tolerance is not None and not self.qp_tolerance > 0:
            raise ValueError(f"qp_tolerance must be > 0, got {self.qp_tolerance}.")
        if self.qp_max_iter is not None and self.qp_max_iter < 1:
            raise ValueError(f"qp_max_iter must be >= 1, got {self.qp_max_iter}.")

    def epsilon(self, horizon: int) -> float:
        """Termination threshold for a horizon of `horizon` waypoints."""
        return self.eps_scale * horizon

    def with_overrides(self, **overrides: Any) -> SoptConfig:
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SoptConfig:
        names = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in names})

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SplitSchedule:
    """Split points W over waypoint indices and the segment mode of one iteration.

    Odd mode optimizes [w0, w2], [w2, w4], ...; even mode optimizes [w1, w3], ...
    and keeps the head split [w0, w1] and the tail split [w2N-1, w2N] fixed.
    """

    W: tuple[int, ...]
    mode: SplitMode = SplitMode.ODD
    iteration: int = 1

    def __post_init__(self) -> None:
        if len(self.W) < 3 or len(self.W) % 2 == 0:
            raise ValueError(f"W needs 2N+1 split points, got {len(self.W)}.")
        if self.W[0] != 0 or any(b <= a for a, b in zip(self.W, self.W[1:])):
            raise ValueError(f"W must start at 0 and be strictly increasing, got {self.W}.")
        if self.n_segments == 1 and self.mode is SplitMode.EVEN:
            object.__setattr__(self, "mode", SplitMode.ODD)

    @property
    def n_segments(self) -> int:
        return (len(self.W) - 1) // 2

    @property
    def last(self) -> int:
        return self.W[-1]

    def odd_segments(self) -> list[tuple[int, int]]:
        return [(self.W[i], self.W[i + 2]) for i in range(0, len(self.W) - 2, 2)]

    def even_segments(self) -> list[tuple[int, int]]:
        return [(self.W[i], self.W[i + 2]) for i in range(1, len(self.W) - 3, 2)]

    def segments(self) -> list[tuple[int, int]]:
        if self.mode is SplitMode.ODD:
            return self.odd_segments()
        return self.even_segments()

    def advanced(self) -> SplitSchedule:
        mode = SplitMode.ODD if self.n_segments == 1 else self.mode.flipped()
        return replace(self, mode=mode, iteration=self.iteration + 1)


@dataclass
class Segment:
    """One segment subproblem: waypoints [start, end] of the current iterate."""

    start: int
    end: int
    z_start: np.ndarray
    states: np.ndarray
    inputs: np.ndarray

    def __post_init__(self) -> None:
        if self.end <= self.start:
            raise ValueError(f"Segment [{self.start}, {self.end}] is empty.")
        if len(self.states) != self.end - self.start + 1:
            raise ValueError("Segment states must cover every waypoint of the window.")
        if len(self.inputs) != self.end - self.start:
            raise ValueError("Segment needs one input per step.")

    @property
    def steps(self) -> int:
        return self.end - self.start

    @property
    def window(self) -> tuple[int, int]:
        return self.start, self.end


@dataclass
class ConvexFeasibleSet:
    """Linearized safety constraints A u >= b over the stacked segment inputs."""

    A: np.ndarray
    b: np.ndarray
    provenance: list[tuple[int, int, int]]
    clearance: np.ndarray
    reference_inputs: np.ndarray

    @property
    def rows(self) -> int:
        return len(self.b)

    def margin(self, u: np.ndarray) -> np.ndarray:
        return self.A @ np.asarray(u, dtype=float).reshape(-1) - self.b

    @classmethod
    def unconstrained(cls, reference_inputs: np.ndarray) -> ConvexFeasibleSet:
        u = np.asarray(reference_inputs, dtype=float).reshape(-1)
        return cls(
            A=np.zeros((0, u.size)),
            b=np.zeros(0),
            provenance=[],
            clearance=np.zeros(0),
            reference_inputs=u,
        )


@dataclass
class PlanResult:
    trajectory: Trajectory
    cost_history: list[float]
    segment_count_history: list[int]
    iterations: int
    converged: bool
    timings: dict[str, float]
    reference_cost: float = float("nan")
    initial_segments: int = 0
    min_clearance: float = float("inf")
    audit_passed: bool = True
    segment_failures: int = 0
    schedule: list[int] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.converged and self.audit_passed

    @property
    def final_cost(self) -> float:
        return self.cost_history[-1] if self.cost_history else float("nan")

    @property
    def final_segments(self) -> int:
        if self.segment_count_history:
            return self.segment_count_history[-1]
        return self.initial_segments

    def to_dict(self) -> dict[str, Any]:
        trajectory = self.trajectory
        return {
            "success": self.success,
            "converged": self.converged,
            "iterations": self.iterations,
            "cost_history": list(self.cost_history),
            "reference_cost": self.reference_cost,
            "segment_count_history": list(self.segment_count_history),
            "initial_segments": self.initial_segments,
            "min_clearance": None if np.isinf(self.min_clearance) else self.min_clearance,
            "audit_passed": self.audit_passed,
            "segment_failures": self.segment_failures,
            "split_points": list(self.schedule),
            "timings": dict(self.timings),
            "horizon": trajectory.horizon,
            "states": trajectory.waypoints.tolist(),
            "inputs": trajectory.inputs.tolist(),
        }
