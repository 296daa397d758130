import logging
from dataclasses import dataclass
from logging.handlers import MemoryHandler
from pathlib import Path

from environs import Env
from marshmallow.validate import OneOf, Range

from app.planner.utils.constants import (
    DEFAULT_QP_TOLERANCE,
    LOG_GZ_ARCHIVE_FORMAT,
    LOG_ZIP_ARCHIVE_FORMAT,
    QP_DEFAULT_MAX_ITER,
)

BASE_DIR = Path(__file__).resolve().parent
DEFAULT_LOG_DIR = BASE_DIR / "logs"
DEFAULT_OUTPUT_DIR = "out"

DEFAULT_THREADS = 4

DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_LOG_FORMAT = "%(asctime)s | %(name)s | %(levelname)s | %(message)s"
DEFAULT_LOG_ARCHIVE_FORMAT = LOG_ZIP_ARCHIVE_FORMAT
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)
memory_handler = MemoryHandler(capacity=100, flushLevel=logging.ERROR)
memory_handler.setFormatter(logging.Formatter(DEFAULT_LOG_FORMAT))
logger.addHandler(memory_handler)


@dataclass
class RuntimeConfig:
    THREADS: int
    OUTPUT_DIR: str


@dataclass
class SolverConfig:
    QP_TOLERANCE: float
    QP_MAX_ITER: int


@dataclass
class LoggingConfig:
    LEVEL: str
    FORMAT: str
    ARCHIVE_FORMAT: str
    DIR: str
    TO_FILE: bool


@dataclass
class Config:
    runtime: RuntimeConfig
    solver: SolverConfig
    logging: LoggingConfig


def load_config() -> Config:
    env = Env()
    env.read_env()

    threads = env.int(
        "PLANNER_THREADS",
        default=DEFAULT_THREADS,
        validate=Range(min=1, error="PLANNER_THREADS must be >= 1"),
    )
    if threads == 1:
        logger.warning("PLANNER_THREADS is 1. Trees, segments and trials run sequentially.")

    qp_tolerance = env.float(
        "QP_TOLERANCE",
        default=DEFAULT_QP_TOLERANCE,
        validate=Range(min=0, min_inclusive=False, error="QP_TOLERANCE must be > 0"),
    )
    if qp_tolerance > 1e-3:
        logger.warning(f"QP_TOLERANCE={qp_tolerance} is loose. Segment solutions may be inaccurate.")

    return Config(
        runtime=RuntimeConfig(
            THREADS=threads,
            OUTPUT_DIR=env.str("PLANNER_OUTPUT_DIR", default=DEFAULT_OUTPUT_DIR),
        ),
        solver=SolverConfig(
            QP_TOLERANCE=qp_tolerance,
            QP_MAX_ITER=env.int(
                "QP_MAX_ITER",
                default=QP_DEFAULT_MAX_ITER,
                validate=Range(min=1, error="QP_MAX_ITER must be >= 1"),
            ),
        ),
        logging=LoggingConfig(
            LEVEL=env.str(
                "LOG_LEVEL",
                default=DEFAULT_LOG_LEVEL,
                validate=OneOf(
                    LOG_LEVELS + [level.lower() for level in LOG_LEVELS],
                    error="LOG_LEVEL must be one of: {choices}",
                ),
            ).upper(),
            FORMAT=env.str("LOG_FORMAT", default=DEFAULT_LOG_FORMAT),
            ARCHIVE_FORMAT=env.str(
                "LOG_ARCHIVE_FORMAT",
                default=DEFAULT_LOG_ARCHIVE_FORMAT,
                validate=OneOf(
                    [LOG_ZIP_ARCHIVE_FORMAT, LOG_GZ_ARCHIVE_FORMAT],
                    error="LOG_ARCHIVE_FORMAT must be one of: {choices}",
                ),
            ),
            DIR=env.str("LOG_DIR", default=str(DEFAULT_LOG_DIR)),
            TO_FILE=env.bool("LOG_TO_FILE", default=True),
        ),
    )
