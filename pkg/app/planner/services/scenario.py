import json
import logging
import math
import os
from typing import Any

import numpy as np
from marshmallow import Schema, ValidationError, fields, validates_schema
from marshmallow.validate import Length, OneOf, Range

from app.planner.models import (
    BenchmarkSuite,
    Circle,
    ConvexPolygon,
    GeneratorSpec,
    Obstacle,
    RobotModel,
    RRTConfig,
    Scenario,
    SoptConfig,
    Variant,
    World,
)
from app.planner.services.world import clearance_matrix
from app.planner.utils.constants import (
    GENERATOR_ATTEMPTS_PER_OBSTACLE,
    GENERATOR_MAX_POLYGON_VERTICES,
    GENERATOR_POINT_RADIUS,
    SCENARIO_ENCODING,
    RobotKind,
    ShapeKind,
)
from app.planner.utils.errors import ScenarioValidationError

logger = logging.getLogger(__name__)

POSITIVE = Range(min=0, min_inclusive=False)
NON_NEGATIVE = Range(min=0)


def _pair() -> fields.List:
    return fields.List(fields.Float(), validate=Length(equal=2))


# region: Schemas


class ObstacleSchema(Schema):
    id = fields.Integer(required=True, strict=True)
    shape = fields.String(required=True, validate=OneOf([kind.value for kind in ShapeKind]))
    center = _pair()
    radius = fields.Float(validate=POSITIVE)
    vertices = fields.List(_pair(), validate=Length(min=3))
    inflation = fields.Float(validate=NON_NEGATIVE)

    @validates_schema
    def check_shape(self, data: dict[str, Any], **kwargs: Any) -> None:
        if data["shape"] == ShapeKind.CIRCLE.value:
            for name in ("center", "radius"):
                if name not in data:
                    raise ValidationError("Required for circle obstacles.", field_name=name)
            return
        if "vertices" not in data:
            raise ValidationError("Required for polygon obstacles.", field_name="vertices")
        try:
            ConvexPolygon(vertices=tuple(tuple(v) for v in data["vertices"]))
        except ValueError as exception:
            raise ValidationError(str(exception), field_name="vertices")


class WorldSchema(Schema):
    bounds = fields.List(fields.Float(), required=True, validate=Length(equal=4))
    obstacles = fields.List(fields.Nested(ObstacleSchema))

    @validates_schema
    def check_world(self, data: dict[str, Any], **kwargs: Any) -> None:
        xmin, ymin, xmax, ymax = data["bounds"]
        if not (xmax > xmin and ymax > ymin):
            raise ValidationError("Bounds need strictly positive extent.", field_name="bounds")
        ids = [obstacle["id"] for obstacle in data.get("obstacles", [])]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"Obstacle ids must be unique, got {ids}.", field_name="obstacles")


class RobotSchema(Schema):
    kind = fields.String(validate=OneOf([kind.value for kind in RobotKind]))
    dt = fields.Float(required=True, validate=POSITIVE)
    input_bounds = fields.List(_pair(), required=True, validate=Length(min=1))
    n_joints = fields.Integer(strict=True, validate=Range(min=1))
    link_lengths = fields.List(fields.Float(validate=POSITIVE))
    base = _pair()
    spheres_per_link = fields.Integer(strict=True, validate=Range(min=1))
    sphere_radius = fields.Float(validate=POSITIVE)
    joint_limits = fields.List(_pair())

    @validates_schema
    def check_robot(self, data: dict[str, Any], **kwargs: Any) -> None:
        for lower, upper in data["input_bounds"]:
            if not lower < upper:
                raise ValidationError(
                    f"Input bound ({lower}, {upper}) needs lower < upper.", field_name="input_bounds"
                )
        if data.get("kind") == RobotKind.PLANAR_ARM.value:
            for name in ("n_joints", "link_lengths"):
                if name not in data:
                    raise ValidationError("Required for planar arms.", field_name=name)
        try:
            RobotModel.from_dict(data)
        except ValueError as exception:
            raise ValidationError(str(exception), field_name="input_bounds")


class RRTSchema(Schema):
    n_samples = fields.Integer(strict=True, validate=Range(min=1))
    n_trees = fields.Integer(strict=True, validate=Range(min=1))
    steer_step = fields.Float(validate=POSITIVE)
    goal_bias = fields.Float(validate=Range(min=0, max=1))
    rewire_gamma = fields.Float(validate=POSITIVE)
    edge_check_resolution = fields.Float(validate=POSITIVE)
    seed = fields.Integer(strict=True)
    max_batches = fields.Integer(strict=True, validate=Range(min=1))

    @validates_schema
    def check_resolution(self, data: dict[str, Any], **kwargs: Any) -> None:
        steer = data.get("steer_step", RRTConfig.steer_step)
        resolution = data.get("edge_check_resolution", RRTConfig.edge_check_resolution)
        if resolution > steer:
            raise ValidationError(
                "Must not exceed steer_step.", field_name="edge_check_resolution"
            )


class SoptSchema(Schema):
    n_segments = fields.Integer(strict=True, validate=Range(min=1))
    desired_speed = fields.Float(validate=POSITIVE)
    eps_scale = fields.Float(validate=POSITIVE)
    max_iterations = fields.Integer(strict=True, validate=Range(min=1))
    Q_weight = fields.Float(validate=POSITIVE)
    R_weight = fields.Float(validate=POSITIVE)
    auto_merge = fields.Boolean()
    obstacle_margin = fields.Float(validate=POSITIVE, allow_none=True)
    resample = fields.Boolean()
    qp_tolerance = fields.Float(validate=POSITIVE)
    qp_max_iter = fields.Integer(strict=True, validate=Range(min=1))


class PlannerSchema(Schema):
    rrt = fields.Nested(RRTSchema)
    sopt = fields.Nested(SoptSchema)


class ScenarioSchema(Schema):
    world = fields.Nested(WorldSchema, required=True)
    robot = fields.Nested(RobotSchema, required=True)
    start = fields.List(fields.Float(), required=True, validate=Length(min=1))
    goal = fields.List(fields.Float(), required=True, validate=Length(min=1))
    planner = fields.Nested(PlannerSchema)

    @validates_schema
    def check_endpoints(self, data: dict[str, Any], **kwargs: Any) -> None:
        dim = RobotModel.from_dict(data["robot"]).config_dim
        for name in ("start", "goal"):
            if len(data[name]) != dim:
                raise ValidationError(
                    f"Expected {dim} configuration values, got {len(data[name])}.",
                    field_name=name,
                )


class VariantSchema(Schema):
    label = fields.String(required=True, validate=Length(min=1))
    overrides = fields.Nested(SoptSchema)
    optimize = fields.Boolean()


class GeneratorSchema(Schema):
    robot = fields.Nested(RobotSchema, required=True)
    bounds = fields.List(fields.Float(), required=True, validate=Length(equal=4))
    obstacles = fields.List(
        fields.Integer(strict=True, validate=Range(min=0)), required=True, validate=Length(equal=2)
    )
    count = fields.Integer(strict=True, validate=Range(min=1))
    seed = fields.Integer(strict=True)
    start = fields.List(fields.Float())
    goal = fields.List(fields.Float())
    radius_range = fields.List(fields.Float(validate=POSITIVE), validate=Length(equal=2))
    polygon_fraction = fields.Float(validate=Range(min=0, max=1))
    planner = fields.Nested(PlannerSchema)

    @validates_schema
    def check_ranges(self, data: dict[str, Any], **kwargs: Any) -> None:
        low, high = data["obstacles"]
        if low > high:
            raise ValidationError("Obstacle range needs min <= max.", field_name="obstacles")
        radius = data.get("radius_range")
        if radius and radius[0] > radius[1]:
            raise ValidationError("Radius range needs min <= max.", field_name="radius_range")


class SuiteSchema(Schema):
    variants = fields.List(fields.Nested(VariantSchema), required=True, validate=Length(min=1))
    trials = fields.Integer(strict=True, validate=Range(min=1))
    scenarios = fields.List(fields.String())
    generator = fields.Nested(GeneratorSchema)
    threads = fields.Integer(strict=True, validate=Range(min=1))

    @validates_schema
    def check_suite(self, data: dict[str, Any], **kwargs: Any) -> None:
        labels = [variant["label"] for variant in data["variants"]]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValidationError(f"Duplicate variant labels: {duplicates}.", field_name="variants")
        if not data.get("scenarios") and "generator" not in data:
            raise ValidationError("A suite needs scenarios or a generator.", field_name="scenarios")


# endregion

# region: Error location


def _skip_whitespace(text: str, index: int) -> int:
    while index < len(text) and text[index] in " \t\r\n":
        index += 1
    return index


def _first_error(messages: Any, path: list[Any]) -> tuple[list[Any], str]:
    if isinstance(messages, dict):
        key = next(iter(messages))
        if key == "_schema":
            return path, _first_error(messages[key], path)[1]
        return _first_error(messages[key], path + [key])
    if isinstance(messages, list):
        if messages and all(isinstance(item, str) for item in messages):
            return path, " ".join(messages)
        return _first_error(messages[0], path)
    return path, str(messages)


def locate(text: str, path: list[Any]) -> int:
    """1-based line of the deepest member of `path` present in the JSON `text`."""
    decoder = json.JSONDecoder()
    index = _skip_whitespace(text, 0)
    position = index

    for key in path:
        if index >= len(text) or text[index] not in "{[":
            break
        closing = "}" if text[index] == "{" else "]"
        i = _skip_whitespace(text, index + 1)
        count = 0
        found = False
        while i < len(text) and text[i] != closing:
            if closing == "}":
                member_start = i
                name, i = decoder.raw_decode(text, i)
                i = _skip_whitespace(text, _skip_whitespace(text, i) + 1)
                match = name == str(key)
            else:
                member_start = i
                match = count == key
            if match:
                position, index, found = member_start, i, True
                break
            _, i = decoder.raw_decode(text, i)
            i = _skip_whitespace(text, i)
            if i < len(text) and text[i] == ",":
                i = _skip_whitespace(text, i + 1)
            count += 1
        if not found:
            break

    return text.count("\n", 0, position) + 1


def _load_json(text: str, schema: Schema, source: str) -> dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exception:
        raise ScenarioValidationError(exception.msg, source=source, line=exception.lineno)
    try:
        return schema.load(data)
    except ValidationError as exception:
        path, message = _first_error(exception.messages, [])
        where = ".".join(str(key) for key in path)
        raise ScenarioValidationError(
            f"{where}: {message}" if where else message, source=source, line=locate(text, path)
        )


# endregion


class ScenarioService:
    """Loads and validates scenario and suite files and generates random scenarios."""

    def loads(self, text: str, source: str = "<scenario>") -> Scenario:
        data = _load_json(text, ScenarioSchema(), source)
        name = os.path.splitext(os.path.basename(source))[0]
        return Scenario.from_dict(data, name=name)

    def load(self, file_path: str) -> Scenario:
        with open(file_path, "r", encoding=SCENARIO_ENCODING) as file:
            text = file.read()
        try:
            scenario = self.loads(text, source=file_path)
        except ScenarioValidationError as exception:
            logger.error(f"Invalid scenario: {exception}")
            raise
        logger.info(
            f"Loaded scenario '{scenario.name}' with {len(scenario.world.obstacles)} obstacles "
            f"and robot {scenario.robot.kind.value}."
        )
        return scenario

    def load_suite(self, file_path: str) -> BenchmarkSuite:
        with open(file_path, "r", encoding=SCENARIO_ENCODING) as file:
            text = file.read()
        try:
            data = _load_json(text, SuiteSchema(), file_path)
        except ScenarioValidationError as exception:
            logger.error(f"Invalid suite: {exception}")
            raise

        base_dir = os.path.dirname(os.path.abspath(file_path))
        generator = data.get("generator")
        suite = BenchmarkSuite(
            variants=tuple(Variant.from_dict(variant) for variant in data["variants"]),
            trials=data.get("trials", 1),
            scenarios=tuple(
                path if os.path.isabs(path) else os.path.join(base_dir, path)
                for path in data.get("scenarios", [])
            ),
            generator=GeneratorSpec.from_dict(generator) if generator else None,
            threads=data.get("threads"),
        )
        logger.info(
            f"Loaded suite with {len(suite.variants)} variants and {suite.trials} trials."
        )
        return suite

    def suite_scenarios(self, suite: BenchmarkSuite) -> list[Scenario]:
        scenarios = [self.load(path) for path in suite.scenarios]
        if suite.generator is not None:
            scenarios.extend(
                self.generate(suite.generator, index) for index in range(suite.generator.count)
            )
        return scenarios

    def generate(self, spec: GeneratorSpec, index: int = 0) -> Scenario:
        """Random obstacles in bounds, rejected when they crowd the start or goal pose."""
        seed = spec.seed + index
        rng = np.random.default_rng(seed)
        model = RobotModel.from_dict(spec.robot)
        start, goal = self._endpoints(spec, model)
        xmin, ymin, xmax, ymax = spec.bounds

        endpoint_points = model.collision_points_batch(np.vstack([start, goal])).reshape(-1, 2)
        required = 2.0 * max(model.collision_radius, GENERATOR_POINT_RADIUS)
        target = int(rng.integers(spec.obstacles[0], spec.obstacles[1] + 1))

        obstacles: list[Obstacle] = []
        for _ in range(target * GENERATOR_ATTEMPTS_PER_OBSTACLE):
            if len(obstacles) == target:
                break
            radius = float(rng.uniform(*spec.radius_range))
            center = (float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)))
            if rng.random() < spec.polygon_fraction:
                count = int(rng.integers(3, GENERATOR_MAX_POLYGON_VERTICES + 1))
                jitter = rng.uniform(-0.3, 0.3, count) * math.pi / count
                angles = rng.uniform(0, 2 * math.pi) + 2 * math.pi * np.arange(count) / count + jitter
                shape: Circle | ConvexPolygon = ConvexPolygon(
                    vertices=tuple(
                        (center[0] + radius * math.cos(a), center[1] + radius * math.sin(a))
                        for a in angles
                    )
                )
            else:
                shape = Circle(center=center, radius=radius)
            candidate = Obstacle(id=len(obstacles), shape=shape)
            lone = World(obstacles=(candidate,), bounds=spec.bounds)
            if clearance_matrix(lone, endpoint_points).min() >= required:
                obstacles.append(candidate)

        if len(obstacles) < target:
            logger.warning(f"Placed {len(obstacles)} of {target} obstacles for seed {seed}.")

        planner = spec.planner
        return Scenario(
            world=World(obstacles=tuple(obstacles), bounds=spec.bounds),
            robot=model,
            start=tuple(start.tolist()),
            goal=tuple(goal.tolist()),
            rrt=RRTConfig.from_dict(planner.get("rrt") or {}),
            sopt=SoptConfig.from_dict(planner.get("sopt") or {}),
            name=f"generated-{seed}",
        )

    def _endpoints(self, spec: GeneratorSpec, model: RobotModel) -> tuple[np.ndarray, np.ndarray]:
        if spec.start is not None and spec.goal is not None:
            return np.asarray(spec.start), np.asarray(spec.goal)
        if model.kind is RobotKind.POINT_MASS_2D:
            xmin, ymin, xmax, ymax = spec.bounds
            width, height = xmax - xmin, ymax - ymin
            start = np.array([xmin + 0.05 * width, ymin + 0.05 * height])
            goal = np.array([xmax - 0.05 * width, ymax - 0.05 * height])
        else:
            start = np.zeros(model.config_dim)
            goal = np.zeros(model.config_dim)
            start[0], goal[0] = math.pi / 4, 3 * math.pi / 4
        return (
            np.asarray(spec.start) if spec.start is not None else start,
            np.asarray(spec.goal) if spec.goal is not None else goal,
        )
