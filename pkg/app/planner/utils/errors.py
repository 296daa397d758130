from typing import Any


class PlannerError(Exception):
    """Base class for every error raised by the planner."""


class ObstacleNotFoundError(PlannerError, KeyError):
    def __init__(self, obstacle_id: int) -> None:
        super().__init__(f"Obstacle {obstacle_id} does not exist.")
        self.obstacle_id = obstacle_id

    def __str__(self) -> str:
        return self.args[0]


class DimensionError(PlannerError, ValueError):
    pass


class ScenarioValidationError(PlannerError, ValueError):
    def __init__(self, message: str, source: str | None = None, line: int | None = None) -> None:
        self.message = message
        self.source = source
        self.line = line
        super().__init__(self._format())

    def _format(self) -> str:
        location = self.source or "<scenario>"
        if self.line is not None:
            location = f"{location}:{self.line}"
        return f"{location}: {self.message}"


class InfeasibleEndpointError(PlannerError):
    pass


class PathNotFoundError(PlannerError):
    pass


class DegeneratePathError(PlannerError, ValueError):
    pass


class ScheduleInvariantError(PlannerError, RuntimeError):
    pass


class SegmentFailureError(PlannerError):
    def __init__(self, segment: tuple[int, int], reason: str) -> None:
        super().__init__(f"Segment [{segment[0]}, {segment[1]}] failed: {reason}")
        self.segment = segment
        self.reason = reason


class PlanningFailureError(PlannerError):
    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or {}
