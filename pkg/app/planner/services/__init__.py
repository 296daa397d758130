from app.config import Config
from app.planner.models import ServicesContainer

from .benchmark import BenchmarkService
from .report import ReportService
from .rrt_star import RRTStarService
from .scenario import ScenarioService
from .sopt import SoptService


def initialize(config: Config) -> ServicesContainer:
    threads = config.runtime.THREADS
    rrt_star = RRTStarService(threads=threads)
    sopt = SoptService(
        threads=threads,
        qp_tolerance=config.solver.QP_TOLERANCE,
        qp_max_iter=config.solver.QP_MAX_ITER,
    )
    scenario = ScenarioService()
    report = ReportService()
    benchmark = BenchmarkService(
        rrt_star=rrt_star,
        sopt=sopt,
        scenario=scenario,
        report=report,
        threads=threads,
    )

    return ServicesContainer(
        rrt_star=rrt_star,
        sopt=sopt,
        scenario=scenario,
        report=report,
        benchmark=benchmark,
    )
