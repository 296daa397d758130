from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from app.planner.services import (
        BenchmarkService,
        ReportService,
        RRTStarService,
        ScenarioService,
        SoptService,
    )

from dataclasses import dataclass


@dataclass
class ServicesContainer:
    rrt_star: RRTStarService
    sopt: SoptService
    scenario: ScenarioService
    report: ReportService
    benchmark: BenchmarkService
