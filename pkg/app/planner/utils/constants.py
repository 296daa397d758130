# region: Files
LOG_ZIP_ARCHIVE_FORMAT = "zip"
LOG_GZ_ARCHIVE_FORMAT = "gz"
SCENARIO_ENCODING = "utf-8"
CSV_FILENAME = "metrics.csv"
PLAN_REPORT_FILENAME = "plan.json"
PLAN_SVG_FILENAME = "plan.svg"
# endregion

# region: World
DEFAULT_INFLATION = 0.0
GRADIENT_FALLBACK = (1.0, 0.0)  # direction used at a circle's exact center
# endregion

# region: RRT*
DEFAULT_N_SAMPLES = 2000
DEFAULT_N_TREES = 8
DEFAULT_STEER_STEP = 0.5
DEFAULT_GOAL_BIAS = 0.05
DEFAULT_REWIRE_GAMMA = 2.0
DEFAULT_EDGE_CHECK_RESOLUTION = 0.05
DEFAULT_MAX_BATCHES = 20
DEFAULT_SEED = 0
# endregion

# region: sOpt
DEFAULT_N_SEGMENTS = 5
DEFAULT_DESIRED_SPEED = 1.0
DEFAULT_EPS_SCALE = 1e-3
DEFAULT_MAX_ITERATIONS = 20
DEFAULT_Q_WEIGHT = 0.01
DEFAULT_R_WEIGHT = 5e-4
DEFAULT_QP_TOLERANCE = 1e-6
SLACK_PENALTY_FACTOR = 1e4
FAILURE_STREAK_LIMIT = 3
AUDIT_TOLERANCE = 1e-6
SETTLE_TOLERANCE = 1e-6  # a tail closer than this to the goal state may be trimmed
# endregion

# region: QP core
QP_DEFAULT_TOLERANCE = 1e-8
QP_DEFAULT_MAX_ITER = 200
QP_STEP_FRACTION = 0.99
QP_DIVERGENCE_LIMIT = 1e12
# endregion

# region: Scenario generator
GENERATOR_POINT_RADIUS = 0.1  # body radius assumed for the point mass when keeping endpoints clear
GENERATOR_ATTEMPTS_PER_OBSTACLE = 100
GENERATOR_MAX_POLYGON_VERTICES = 6
# endregion

# region: Reports
CSV_HEADER = (
    "variant",
    "label",
    "trials",
    "time_mean_s",
    "time_std_s",
    "rrt_time_mean_s",
    "cost_mean",
    "iters_mean",
    "segments_initial",
    "segments_final_mean",
    "success_rate_pct",
)
CSV_TIMING_COLUMNS = ("time_mean_s", "time_std_s", "rrt_time_mean_s")
SVG_HASH_SALT = "rrt-sopt"
SVG_FIGURE_SIZE = (6.0, 6.0)
SVG_ARM_POSES = 10
SVG_CORNER_ARC_POINTS = 8
# endregion

# region: Enums
from enum import Enum, IntEnum


class ShapeKind(Enum):
    CIRCLE = "circle"
    POLYGON = "polygon"


class RobotKind(Enum):
    POINT_MASS_2D = "point_mass_2d"
    PLANAR_ARM = "planar_arm"

    @classmethod
    def from_str(cls, value: str) -> "RobotKind":
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError(f"Invalid robot kind: {value}")


class SplitMode(Enum):
    ODD = "odd"
    EVEN = "even"

    def flipped(self) -> "SplitMode":
        return SplitMode.EVEN if self is SplitMode.ODD else SplitMode.ODD


class QpStatus(Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


class ExitCode(IntEnum):
    SUCCESS = 0
    VALIDATION_ERROR = 1
    PLANNING_FAILURE = 2
    IO_ERROR = 3


# endregion
