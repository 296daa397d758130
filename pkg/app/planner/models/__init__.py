from .world import Circle, ConvexPolygon, Obstacle, World
from .robot import PlanarArm, PointMass2D, RobotModel, Trajectory
from .rrt import Path, RRTConfig, Tree
from .qp import QpProblem, QpSolution
from .sopt import ConvexFeasibleSet, PlanResult, Segment, SoptConfig, SplitSchedule
from .scenario import Scenario
from .bench import BenchmarkSuite, GeneratorSpec, RunMetrics, TrialRecord, Variant, VariantMetrics
from .services_container import ServicesContainer
