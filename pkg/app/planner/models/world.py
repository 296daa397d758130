from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any

import numpy as np

from app.planner.utils.constants import DEFAULT_INFLATION, GRADIENT_FALLBACK, ShapeKind
from app.planner.utils.errors import ObstacleNotFoundError


def _as_points(points: Any) -> np.ndarray:
    array = np.asarray(points, dtype=float)
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2 or array.shape[1] != 2:
        raise ValueError(f"Expected 2-vectors, got array of shape {np.shape(points)}.")
    return array


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    kind = ShapeKind.CIRCLE

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"Circle radius must be > 0, got {self.radius}.")

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        offsets = points - np.asarray(self.center)
        return np.linalg.norm(offsets, axis=1) - self.radius

    def gradient(self, points: np.ndarray) -> np.ndarray:
        offsets = points - np.asarray(self.center)
        norms = np.linalg.norm(offsets, axis=1)
        gradients = np.tile(np.asarray(GRADIENT_FALLBACK), (len(points), 1))
        nonzero = norms > 0
        gradients[nonzero] = offsets[nonzero] / norms[nonzero, None]
        return gradients

    def to_dict(self) -> dict[str, Any]:
        return {"shape": self.kind.value, "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: tuple[tuple[float, float], ...]

    kind = ShapeKind.POLYGON

    def __post_init__(self) -> None:
        vertices = np.asarray(self.vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 3:
            raise ValueError("Polygon needs at least 3 two-dimensional vertices.")
        if len({tuple(v) for v in vertices.tolist()}) != len(vertices):
            raise ValueError("Polygon has repeated vertices.")
        edges = np.roll(vertices, -1, axis=0) - vertices
        turns = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(
            edges, -1, axis=0
        )[:, 0]
        if np.any(turns <= 0):
            raise ValueError("Polygon must be convex and counter-clockwise.")

    @cached_property
    def _vertices(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    @cached_property
    def _edges(self) -> np.ndarray:
        return np.roll(self._vertices, -1, axis=0) - self._vertices

    @cached_property
    def _normals(self) -> np.ndarray:
        # outward for counter-clockwise winding
        normals = np.stack([self._edges[:, 1], -self._edges[:, 0]], axis=1)
        return normals / np.linalg.norm(normals, axis=1, keepdims=True)

    def _closest(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        relative = points[:, None, :] - self._vertices[None, :, :]
        lengths = np.einsum("ij,ij->i", self._edges, self._edges)
        t = np.clip(np.einsum("kij,ij->ki", relative, self._edges) / lengths, 0.0, 1.0)
        closest = self._vertices[None, :, :] + t[:, :, None] * self._edges[None, :, :]
        segment_distance = np.linalg.norm(points[:, None, :] - closest, axis=2)
        line_distance = np.einsum("kij,ij->ki", relative, self._normals)
        return closest, segment_distance, line_distance

    def outline(self, inflation: float = 0.0, arc_points: int = 8) -> np.ndarray:
        """Boundary of the polygon grown by `inflation`, corners rounded with `arc_points` each."""
        if inflation <= 0:
            return self._vertices.copy()
        incoming = np.roll(self._normals, 1, axis=0)
        corners = []
        for vertex, before, after in zip(self._vertices, incoming, self._normals):
            start = np.arctan2(before[1], before[0])
            sweep = (np.arctan2(after[1], after[0]) - start) % (2.0 * np.pi)
            angles = start + np.linspace(0.0, sweep, arc_points)
            corners.append(vertex + inflation * np.column_stack([np.cos(angles), np.sin(angles)]))
        return np.vstack(corners)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        _, segment_distance, line_distance = self._closest(points)
        outside = line_distance.max(axis=1)
        return np.where(outside > 0, segment_distance.min(axis=1), outside)

    def gradient(self, points: np.ndarray) -> np.ndarray:
        closest, segment_distance, line_distance = self._closest(points)
        rows = np.arange(len(points))
        gradients = self._normals[np.argmax(line_distance, axis=1)]

        outside = line_distance.max(axis=1) > 0
        if np.any(outside):
            nearest = np.argmin(segment_distance, axis=1)
            offsets = points - closest[rows, nearest]
            norms = segment_distance[rows, nearest]
            gradients[outside] = offsets[outside] / norms[outside, None]
        return gradients

    def to_dict(self) -> dict[str, Any]:
        return {"shape": self.kind.value, "vertices": [list(v) for v in self.vertices]}


Shape = Circle | ConvexPolygon


@dataclass(frozen=True)
class Obstacle:
    id: int
    shape: Shape
    inflation: float = DEFAULT_INFLATION

    def __post_init__(self) -> None:
        if self.inflation < 0:
            raise ValueError(f"Obstacle {self.id}: inflation must be >= 0.")

    def signed_distance(self, points: Any) -> np.ndarray:
        return self.shape.signed_distance(_as_points(points)) - self.inflation

    def gradient(self, points: Any) -> np.ndarray:
        return self.shape.gradient(_as_points(points))

    def inflated(self, extra: float) -> Obstacle:
        return replace(self, inflation=self.inflation + extra)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Obstacle:
        kind = ShapeKind(data["shape"])
        if kind is ShapeKind.CIRCLE:
            shape: Shape = Circle(center=tuple(data["center"]), radius=float(data["radius"]))
        else:
            shape = ConvexPolygon(vertices=tuple(tuple(v) for v in data["vertices"]))
        inflation = float(data.get("inflation", DEFAULT_INFLATION))
        return cls(id=int(data["id"]), shape=shape, inflation=inflation)

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, **self.shape.to_dict(), "inflation": self.inflation}


@dataclass(frozen=True)
class World:
    obstacles: tuple[Obstacle, ...] = ()
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 10.0, 10.0)
    _index: dict[int, Obstacle] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmax > xmin and ymax > ymin):
            raise ValueError(f"World bounds need positive extent, got {self.bounds}.")
        index = {obstacle.id: obstacle for obstacle in self.obstacles}
        if len(index) != len(self.obstacles):
            raise ValueError("Obstacle ids must be unique.")
        object.__setattr__(self, "_index", index)

    def get(self, obstacle_id: int) -> Obstacle:
        try:
            return self._index[obstacle_id]
        except KeyError:
            raise ObstacleNotFoundError(obstacle_id) from None

    @property
    def ids(self) -> list[int]:
        return [obstacle.id for obstacle in self.obstacles]

    @property
    def diagonal(self) -> float:
        xmin, ymin, xmax, ymax = self.bounds
        return float(np.hypot(xmax - xmin, ymax - ymin))

    def inflated(self, extra: float) -> World:
        if extra == 0:
            return self
        return World(
            obstacles=tuple(obstacle.inflated(extra) for obstacle in self.obstacles),
            bounds=self.bounds,
        )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> World:
        return cls(
            obstacles=tuple(Obstacle.from_dict(item) for item in data.get("obstacles", [])),
            bounds=tuple(float(b) for b in data["bounds"]),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "bounds": list(self.bounds),
            "obstacles": [obstacle.to_dict() for obstacle in self.obstacles],
        }
