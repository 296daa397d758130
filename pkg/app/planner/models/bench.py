from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from app.planner.models.sopt import SoptConfig


@dataclass(frozen=True)
class Variant:
    """A named planner configuration; `optimize=False` stops after RRT*."""

    label: str
    overrides: dict[str, Any] = field(default_factory=dict)
    optimize: bool = True

    def config(self, base: SoptConfig) -> SoptConfig:
        return base.with_overrides(**self.overrides)

    def kind(self, base: SoptConfig) -> str:
        if not self.optimize:
            return "rrt_star"
        cfg = self.config(base)
        if cfg.n_segments == 1:
            return "opt"
        return "sopt_merge" if cfg.auto_merge else "sopt"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Variant:
        return cls(
            label=data["label"],
            overrides=dict(data.get("overrides") or {}),
            optimize=bool(data.get("optimize", True)),
        )


@dataclass(frozen=True)
class GeneratorSpec:
    """Random cluttered scenarios; scenario i is drawn from seed + i."""

    robot: dict[str, Any]
    bounds: tuple[float, float, float, float]
    obstacles: tuple[int, int]
    count: int = 1
    seed: int = 0
    start: tuple[float, ...] | None = None
    goal: tuple[float, ...] | None = None
    radius_range: tuple[float, float] = (0.3, 1.0)
    polygon_fraction: float = 0.3
    planner: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GeneratorSpec:
        start, goal = data.get("start"), data.get("goal")
        return cls(
            robot=dict(data["robot"]),
            bounds=tuple(float(v) for v in data["bounds"]),
            obstacles=tuple(int(v) for v in data["obstacles"]),
            count=int(data.get("count", 1)),
            seed=int(data.get("seed", 0)),
            start=tuple(float(v) for v in start) if start is not None else None,
            goal=tuple(float(v) for v in goal) if goal is not None else None,
            radius_range=tuple(float(v) for v in data.get("radius_range", (0.3, 1.0))),
            polygon_fraction=float(data.get("polygon_fraction", 0.3)),
            planner=dict(data.get("planner") or {}),
        )


@dataclass(frozen=True)
class BenchmarkSuite:
    variants: tuple[Variant, ...]
    trials: int = 1
    scenarios: tuple[str, ...] = ()
    generator: GeneratorSpec | None = None
    threads: int | None = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}.")
        labels = [variant.label for variant in self.variants]
        if len(set(labels)) != len(labels):
            raise ValueError(f"Variant labels must be unique, got {labels}.")
        if not self.scenarios and self.generator is None:
            raise ValueError("A suite needs scenario files or a generator.")


@dataclass
class TrialRecord:
    scenario: str
    label: str
    trial: int
    seed: int
    rrt_time: float = 0.0
    opt_time: float = 0.0
    cost: float = math.nan
    reference_cost: float = math.nan
    iterations: int = 0
    segments_initial: int = 0
    segments_final: int = 0
    success: bool = False
    error: str | None = None

    @property
    def total_time(self) -> float:
        return self.rrt_time + self.opt_time


@dataclass(frozen=True)
class VariantMetrics:
    variant: str
    label: str
    trials: int
    time_mean_s: float
    time_std_s: float
    rrt_time_mean_s: float
    cost_mean: float
    iters_mean: float
    segments_initial: int
    segments_final_mean: float
    success_rate_pct: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.success_rate_pct <= 100.0:
            raise ValueError(f"success_rate_pct out of range: {self.success_rate_pct}.")

    @classmethod
    def aggregate(
        cls, variant: str, label: str, segments_initial: int, records: list[TrialRecord]
    ) -> VariantMetrics:
        def mean(values: list[float]) -> float:
            values = [v for v in values if not math.isnan(v)]
            return float(np.mean(values)) if values else math.nan

        times = [record.total_time for record in records]
        successes = sum(record.success for record in records)
        return cls(
            variant=variant,
            label=label,
            trials=len(records),
            time_mean_s=mean(times),
            time_std_s=float(np.std(times)) if times else math.nan,
            rrt_time_mean_s=mean([record.rrt_time for record in records]),
            cost_mean=mean([record.cost for record in records]),
            iters_mean=mean([float(record.iterations) for record in records]),
            segments_initial=segments_initial,
            segments_final_mean=mean([float(record.segments_final) for record in records]),
            success_rate_pct=float(Fraction(100 * successes, max(len(records), 1))),
        )

    def row(self) -> tuple[Any, ...]:
        return tuple(asdict(self).values())


@dataclass
class RunMetrics:
    variants: list[VariantMetrics] = field(default_factory=list)
    records: list[TrialRecord] = field(default_factory=list)

    def by_label(self, label: str) -> VariantMetrics:
        for metrics in self.variants:
            if metrics.label == label:
                return metrics
        raise KeyError(label)
