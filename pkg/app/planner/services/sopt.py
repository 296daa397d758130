"""Segmented trajectory optimization on top of an RRT* reference path.

The horizon is cut into 2N splits. Odd iterations optimize the N segments
[w0, w2], [w2, w4], ... and even iterations the N - 1 segments shifted by one
split, so every interior split point moves within two iterations. Each
segment is a convex QP over its inputs with both end states frozen.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
import scipy.linalg

from app.planner.models import (
    ConvexFeasibleSet,
    Path,
    PlanResult,
    QpProblem,
    RobotModel,
    Segment,
    SoptConfig,
    SplitSchedule,
    Trajectory,
    World,
)
from app.planner.services.qpcore import solve as solve_qp
from app.planner.services.robots import (
    collision_points,
    collision_points_jacobian,
    free_response,
    rollout,
    rollout_jacobian,
    trajectory_points,
)
from app.planner.services.world import clearance_matrix, min_clearance
from app.planner.utils.constants import (
    AUDIT_TOLERANCE,
    DEFAULT_QP_TOLERANCE,
    FAILURE_STREAK_LIMIT,
    QP_DEFAULT_MAX_ITER,
    SETTLE_TOLERANCE,
    SLACK_PENALTY_FACTOR,
    QpStatus,
    SplitMode,
)
from app.planner.utils.errors import (
    DegeneratePathError,
    DimensionError,
    PlanningFailureError,
    ScheduleInvariantError,
    SegmentFailureError,
)
from app.planner.utils.timing import PhaseTimer

logger = logging.getLogger(__name__)

MIN_ARC_LENGTH = 1e-9


# region: Horizon and resampling


def horizon_for(length: float, model: RobotModel, cfg: SoptConfig, n_segments: int) -> int:
    """Smallest waypoint count covering `length` at the desired speed with (H - 1) % 2N == 0."""
    block = 2 * n_segments
    needed = math.ceil(length / (cfg.desired_speed * model.dt) - 1e-9)
    horizon = max(needed, block + 1)
    return horizon + (-(horizon - 1)) % block


def arc_length(points: np.ndarray) -> float:
    return float(np.linalg.norm(np.diff(points, axis=0), axis=1).sum())


def resample_by_arc_length(points: np.ndarray, count: int) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    gaps = np.linalg.norm(np.diff(points, axis=0), axis=1)
    keep = np.concatenate([[True], gaps > 0])
    positions = np.concatenate([[0.0], np.cumsum(gaps)])[keep]
    targets = np.linspace(0.0, positions[-1], count)
    return np.column_stack(
        [np.interp(targets, positions, points[keep, j]) for j in range(points.shape[1])]
    )


def _landed(
    model: RobotModel, z0: np.ndarray, inputs: np.ndarray, target: np.ndarray
) -> np.ndarray:
    """`inputs` plus the minimum-norm correction that lands the rollout on `target`."""
    end = model.rollout_states(z0, inputs)[-1]
    terminal = rollout_jacobian(model, z0, inputs)[-model.state_dim :]
    correction = np.linalg.lstsq(terminal, target - end, rcond=None)[0]
    return inputs + correction.reshape(inputs.shape)


def reconstruct_inputs(model: RobotModel, waypoints: np.ndarray) -> np.ndarray:
    """Differenced inputs plus the minimum-norm correction that lands the rollout on the last waypoint."""
    waypoints = np.asarray(waypoints, dtype=float)
    return _landed(model, waypoints[0], model.difference_inputs(waypoints), waypoints[-1])


def settled_index(waypoints: np.ndarray, tolerance: float = SETTLE_TOLERANCE) -> int:
    """First index from which every state stays within `tolerance` of the final state."""
    distance = np.abs(np.asarray(waypoints) - waypoints[-1]).max(axis=1)
    moving = np.flatnonzero(distance > tolerance)
    return int(moving[-1]) + 1 if moving.size else 0


def generate_reference(path: Path, model: RobotModel, cfg: SoptConfig) -> Trajectory:
    """Reference waypoints at uniform arc-length spacing along `path`, zero initial inputs."""
    if path.waypoints.shape[1] != model.config_dim:
        raise DimensionError(
            f"Path configurations have size {path.waypoints.shape[1]}, "
            f"model expects {model.config_dim}."
        )
    length = path.length
    if length < MIN_ARC_LENGTH:
        raise DegeneratePathError("Reference path has zero length.")

    horizon = horizon_for(length, model, cfg, cfg.n_segments)
    reference = model.states_along(resample_by_arc_length(path.waypoints, horizon))
    reference.setflags(write=False)
    logger.debug(f"Reference of length {length:.3f} sampled at H={horizon} waypoints.")
    return Trajectory(
        model, reference[0], np.zeros((horizon - 1, model.input_dim)), reference=reference
    )


def resample_traj(
    traj: Trajectory, model: RobotModel, cfg: SoptConfig, n_segments: int
) -> tuple[Trajectory, bool]:
    """Re-fit the horizon to the trajectory's arc length; the flag tells whether it changed.

    A longer horizon appends rest states at the goal. A shorter one drops the part of
    the tail that already rests at the goal when that covers the difference. Both keep
    the motion and its cost. Otherwise the states are resampled uniformly by arc length.
    """
    waypoints = traj.waypoints
    configurations = model.configuration_of(waypoints)
    length = arc_length(configurations)
    if length < MIN_ARC_LENGTH:
        logger.warning("Trajectory is degenerate, skipping resampling.")
        return traj, False

    horizon = horizon_for(length, model, cfg, n_segments)
    if horizon == traj.horizon:
        return traj, False

    rest = np.zeros((abs(horizon - traj.horizon), model.input_dim))
    at_rest = np.allclose(model.rollout_states(waypoints[-1], rest[:1])[-1], waypoints[-1])
    if horizon > traj.horizon and at_rest:
        inputs = np.vstack([traj.inputs, rest])
        logger.debug(f"Extended horizon {traj.horizon} -> {horizon} at the goal.")
        return Trajectory(model, traj.z0, inputs, reference=traj.reference), True
    if horizon < traj.horizon and settled_index(waypoints) <= horizon - 1:
        inputs = _landed(model, traj.z0, traj.inputs[: horizon - 1], waypoints[-1])
        logger.debug(f"Trimmed resting tail, horizon {traj.horizon} -> {horizon}.")
        return Trajectory(model, traj.z0, inputs, reference=traj.reference), True

    states = model.states_along(resample_by_arc_length(configurations, horizon))
    states[0], states[-1] = waypoints[0], waypoints[-1]
    inputs = reconstruct_inputs(model, states)
    logger.debug(f"Resampled horizon {traj.horizon} -> {horizon}.")
    return Trajectory(model, traj.z0, inputs, reference=traj.reference), True


# endregion

# region: Schedule


def split_reference(traj: Trajectory, split: int | SplitSchedule) -> SplitSchedule:
    """Uniform split points for N segments, or a prior schedule rescaled to the new horizon."""
    last = traj.horizon - 1
    if isinstance(split, SplitSchedule):
        return _rescaled(split, last)

    block = 2 * int(split)
    if block < 2 or last % block:
        raise ScheduleInvariantError(
            f"Horizon H={traj.horizon} cannot be split into {block} equal splits."
        )
    return SplitSchedule(W=tuple(range(0, last + 1, last // block)))


def _rescaled(schedule: SplitSchedule, last: int) -> SplitSchedule:
    count = len(schedule.W)
    if last < count - 1:
        raise ScheduleInvariantError(f"{count} split points do not fit in {last + 1} waypoints.")
    if last == schedule.last:
        return schedule

    scale = last / schedule.last
    points = [int(math.floor(w * scale + 0.5)) for w in schedule.W]
    points[0], points[-1] = 0, last
    for i in range(1, count):
        points[i] = max(points[i], points[i - 1] + 1)
    for i in range(count - 2, -1, -1):
        points[i] = min(points[i], points[i + 1] - 1)
    return replace(schedule, W=tuple(points))


def iter_prog(previous: float, current: float) -> float:
    return abs(previous - current)


def merge_threshold(cfg: SoptConfig, horizon: int, n_segments: int) -> float:
    return 2.0 * cfg.epsilon(horizon) * horizon / n_segments


def merge_step(
    schedule: SplitSchedule, progress: list[float], threshold: float
) -> SplitSchedule:
    """Merge adjacent odd-mode segments whose pair progress is at most `threshold`.

    Pairs are scanned left to right; a pair whose left segment was just merged is skipped.
    """
    n = schedule.n_segments
    if len(progress) != n - 1:
        raise ValueError(f"Expected {n - 1} pair progress values, got {len(progress)}.")

    W = schedule.W
    triples = [(W[2 * i], W[2 * i + 1], W[2 * i + 2]) for i in range(n)]
    merged: list[tuple[int, int, int]] = []
    i = 0
    while i < n:
        if i < n - 1 and progress[i] <= threshold:
            start, end = triples[i][0], triples[i + 1][2]
            merged.append((start, (start + end) // 2, end))
            i += 2
        else:
            merged.append(triples[i])
            i += 1

    if len(merged) == n:
        return schedule
    points = [merged[0][0]]
    for _, middle, end in merged:
        points.extend((middle, end))
    return replace(schedule, W=tuple(points))


# endregion

# region: Costs


def window_cost(
    states: np.ndarray, inputs: np.ndarray, goal: np.ndarray, cfg: SoptConfig
) -> float:
    deviation = np.asarray(states) - goal
    return float(
        cfg.Q_weight * np.sum(deviation * deviation) + cfg.R_weight * np.sum(inputs * inputs)
    )


def trajectory_cost(traj: Trajectory, goal: np.ndarray, cfg: SoptConfig) -> float:
    """Full-horizon objective with the global goal."""
    return window_cost(traj.states, traj.inputs, goal, cfg)


def _pair_progress(
    before: Trajectory, after: Trajectory, schedule: SplitSchedule, goal: np.ndarray, cfg: SoptConfig
) -> list[float]:
    W = schedule.W
    progress = []
    for j in range(schedule.n_segments - 1):
        a, b = W[2 * j], W[2 * j + 4]
        costs = [
            window_cost(traj.waypoints[a + 1 : b + 1], traj.inputs[a:b], goal, cfg)
            for traj in (before, after)
        ]
        progress.append(iter_prog(*costs))
    return progress


def _violation(world: World, model: RobotModel, states: np.ndarray) -> float:
    clearance, _, _ = min_clearance(world, trajectory_points(model, states))
    return max(0.0, -clearance)


# endregion

# region: Segment subproblem


def obstacle_margin(world: World, model: RobotModel, cfg: SoptConfig, steps: int) -> float:
    if cfg.obstacle_margin is not None:
        return cfg.obstacle_margin
    reach = 2.0 * cfg.desired_speed * model.dt * max(steps, 1) * model.lever_arm
    return min(reach, world.diagonal)


def obs_select(
    world: World, segment_states: np.ndarray, model: RobotModel, cfg: SoptConfig
) -> set[int]:
    """Obstacles closer than the margin to some collision point of some segment state."""
    states = np.asarray(segment_states, dtype=float).reshape(-1, model.state_dim)
    if not world.obstacles:
        return set()
    margin = obstacle_margin(world, model, cfg, len(states) - 1)
    distances = clearance_matrix(world, trajectory_points(model, states))
    return {
        obstacle.id
        for obstacle, row in zip(world.obstacles, distances)
        if float(row.min()) < margin
    }


def build_cfs(
    world: World, model: RobotModel, segment: Segment, selected: set[int]
) -> ConvexFeasibleSet:
    """First-order safety constraints around the segment's linearization states.

    Each row keeps h(p(z_t)) + dh/dz (z_t(u) - z_t) >= 0 with z_t(u) the rollout from
    the segment start, so the rows stay exact at u = u_ref whenever the
    linearization states are that rollout.
    """
    u_ref = segment.inputs.reshape(-1)
    if not selected:
        return ConvexFeasibleSet.unconstrained(u_ref)

    n = model.state_dim
    gamma = rollout_jacobian(model, segment.z_start, u_ref)
    rolled = rollout(model, segment.z_start, u_ref).reshape(-1, n)
    obstacles = [world.get(obstacle_id) for obstacle_id in sorted(selected)]

    rows, rhs, clearance = [], [], []
    provenance: list[tuple[int, int, int]] = []
    for t in range(1, segment.steps + 1):
        z_bar = segment.states[t]
        points = collision_points(model, z_bar)
        point_jacobians = collision_points_jacobian(model, z_bar)
        block = gamma[(t - 1) * n : t * n]
        shift = rolled[t - 1] - z_bar
        for obstacle in obstacles:
            h = obstacle.signed_distance(points)
            state_gradient = np.einsum("pi,pij->pj", obstacle.gradient(points), point_jacobians)
            a = state_gradient @ block
            rows.append(a)
            rhs.append(a @ u_ref - h - state_gradient @ shift)
            clearance.append(h)
            provenance.extend((obstacle.id, segment.start + t, p) for p in range(len(points)))

    return ConvexFeasibleSet(
        A=np.vstack(rows),
        b=np.concatenate(rhs),
        provenance=provenance,
        clearance=np.concatenate(clearance),
        reference_inputs=u_ref,
    )


def _acceptable(solution: Any, tolerance: float) -> bool:
    if solution.status is QpStatus.OPTIMAL:
        return True
    return solution.status is QpStatus.MAX_ITER and solution.kkt_residual <= math.sqrt(tolerance)


def solve_segment(
    model: RobotModel,
    segment: Segment,
    cfs: ConvexFeasibleSet,
    endpoint: np.ndarray,
    cfg: SoptConfig,
    goal: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Optimize the segment inputs with the end state pinned to `endpoint`.

    State deviations are measured against `goal`, which defaults to `endpoint`. With
    the global goal the segment cost is exactly the part of the full-horizon objective
    that the segment inputs can change.

    Rows violated at the linearization point get a penalized slack; if the QP is still
    infeasible every row gets one. Returns the inputs, shape (steps, input_dim), and
    the segment cost.
    """
    steps, m, n = segment.steps, model.input_dim, model.state_dim
    k = steps * m
    tolerance = cfg.qp_tolerance or DEFAULT_QP_TOLERANCE  # unset outside SoptService.plan
    max_iter = cfg.qp_max_iter or QP_DEFAULT_MAX_ITER
    endpoint = np.asarray(endpoint, dtype=float)
    target = endpoint if goal is None else np.asarray(goal, dtype=float)
    u_ref = segment.inputs.reshape(-1)

    gamma = rollout_jacobian(model, segment.z_start, u_ref)
    free = free_response(model, segment.z_start, steps).reshape(-1)
    offset = free - np.tile(target, steps)

    P = 2.0 * (cfg.Q_weight * gamma.T @ gamma + cfg.R_weight * np.eye(k))
    P = 0.5 * (P + P.T)
    q = 2.0 * cfg.Q_weight * gamma.T @ offset
    E = gamma[-n:]
    d = endpoint - free[-n:]
    box_G = np.vstack([np.eye(k), -np.eye(k)])
    box_h = np.concatenate([np.tile(model.lower_bounds, steps), -np.tile(model.upper_bounds, steps)])
    penalty = SLACK_PENALTY_FACTOR * cfg.Q_weight

    def attempt(slacked: np.ndarray) -> Any:
        r = int(slacked.sum())
        selector = np.zeros((cfs.rows, r))
        selector[np.flatnonzero(slacked), np.arange(r)] = 1.0
        G = np.vstack(
            [
                np.hstack([cfs.A, selector]),
                np.hstack([box_G, np.zeros((2 * k, r))]),
                np.hstack([np.zeros((r, k)), np.eye(r)]),
            ]
        )
        h = np.concatenate([cfs.b, box_h, np.zeros(r)])
        problem = QpProblem(
            P=scipy.linalg.block_diag(P, 2.0 * penalty * np.eye(r)) if r else P,
            q=np.concatenate([q, np.zeros(r)]),
            G=G,
            h=h,
            E=np.hstack([E, np.zeros((n, r))]),
            d=d,
        )
        shortfall = np.maximum(cfs.b - cfs.A @ u_ref, 0.0)[slacked]
        return solve_qp(
            problem,
            tolerance=tolerance,
            max_iter=max_iter,
            warm_start=np.concatenate([u_ref, shortfall]),
        )

    violated = cfs.margin(u_ref) < 0
    solution = attempt(violated)
    if not _acceptable(solution, tolerance) and cfs.rows:
        if not violated.any():
            logger.warning(
                f"Segment {segment.window} is infeasible although its linearization point "
                f"clears every selected obstacle ({solution.status.value})."
            )
        logger.warning(f"Segment {segment.window}: relaxing all {cfs.rows} safety rows.")
        solution = attempt(np.ones(cfs.rows, dtype=bool))
    if not _acceptable(solution, tolerance):
        raise SegmentFailureError(segment.window, f"QP status {solution.status.value}")

    u = solution.u[:k]
    u = u + np.linalg.lstsq(E, d - E @ u, rcond=None)[0]
    deviation = offset + gamma @ u
    cost = float(cfg.Q_weight * deviation @ deviation + cfg.R_weight * u @ u)
    return u.reshape(steps, m), cost


# endregion


@dataclass
class _WindowOutcome:
    inputs: np.ndarray | None = None
    failed: bool = False


class SoptService:
    def __init__(
        self,
        threads: int = 1,
        qp_tolerance: float = DEFAULT_QP_TOLERANCE,
        qp_max_iter: int = QP_DEFAULT_MAX_ITER,
    ) -> None:
        self.threads = max(1, threads)
        self.qp_tolerance = qp_tolerance
        self.qp_max_iter = qp_max_iter
        logger.debug(f"sOpt service initialized with {self.threads} worker threads.")

    def _resolved(self, cfg: SoptConfig) -> SoptConfig:
        return replace(
            cfg,
            qp_tolerance=cfg.qp_tolerance or self.qp_tolerance,
            qp_max_iter=cfg.qp_max_iter or self.qp_max_iter,
        )

    def _check_path(
        self, world: World, model: RobotModel, path: Path, reference: np.ndarray
    ) -> None:
        """Reject a path whose vertices or edges cut into an obstacle.

        Edges are checked at the reference spacing.
        """
        configurations = np.vstack([path.waypoints, model.configuration_of(reference)])
        points = model.collision_points_batch(configurations).reshape(-1, 2)
        clearance, obstacle_id, _ = min_clearance(world, points)
        if clearance < -AUDIT_TOLERANCE:
            raise PlanningFailureError(
                "Input path is in collision.",
                diagnostics={"min_clearance": clearance, "obstacle_id": obstacle_id},
            )

    def _optimize_window(
        self,
        world: World,
        model: RobotModel,
        cfg: SoptConfig,
        traj: Trajectory,
        linearization: np.ndarray,
        u_lin: np.ndarray,
        window: tuple[int, int],
        goal: np.ndarray,
    ) -> _WindowOutcome:
        a, b = window
        waypoints = traj.waypoints
        segment = Segment(
            start=a,
            end=b,
            z_start=waypoints[a],
            states=linearization[a : b + 1],
            inputs=u_lin[a:b],
        )
        endpoint = goal if b == traj.horizon - 1 else waypoints[b]

        selected = obs_select(world, segment.states, model, cfg)
        cfs = build_cfs(world, model, segment, selected)
        try:
            inputs, cost = solve_segment(model, segment, cfs, endpoint, cfg, goal=goal)
        except SegmentFailureError as exception:
            logger.warning(str(exception))
            return _WindowOutcome(failed=True)

        old_states, old_inputs = waypoints[a + 1 : b + 1], traj.inputs[a:b]
        new_states = model.rollout_states(waypoints[a], inputs)
        old_violation = _violation(world, model, old_states)
        new_violation = _violation(world, model, new_states)
        if new_violation > old_violation + AUDIT_TOLERANCE:
            return _WindowOutcome()
        if new_violation >= old_violation - AUDIT_TOLERANCE and window_cost(
            new_states, inputs, goal, cfg
        ) > window_cost(old_states, old_inputs, goal, cfg):
            return _WindowOutcome()

        logger.debug(
            f"Segment {window}: {len(selected)} obstacles, {cfs.rows} rows, cost {cost:.4f}."
        )
        return _WindowOutcome(inputs=inputs)

    def plan(self, world: World, model: RobotModel, path: Path, cfg: SoptConfig) -> PlanResult:
        cfg = self._resolved(cfg)
        timer = PhaseTimer()
        inflated = world.inflated(model.collision_radius)

        with timer.phase("reference"):
            traj = generate_reference(path, model, cfg)
            reference = traj.reference
            self._check_path(inflated, model, path, reference)
            goal = reference[-1]
            schedule = split_reference(traj, cfg.n_segments)
            first_pass_inputs = traj.inputs
            traj.inputs = reconstruct_inputs(model, reference)
            reference_cost = trajectory_cost(traj, goal, cfg)

        logger.info(
            f"sOpt start: H={traj.horizon}, N={schedule.n_segments}, "
            f"reference cost {reference_cost:.4f}."
        )

        linearization = reference
        cost_history: list[float] = []
        segment_history: list[int] = []
        failures, streak, calm = 0, 0, 0
        start_cost = reference_cost
        converged = False
        iteration = 0

        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            for iteration in range(1, cfg.max_iterations + 1):
                windows = schedule.segments()
                u_lin = first_pass_inputs if iteration == 1 else traj.inputs
                with timer.phase("optimize"):
                    outcomes = list(
                        executor.map(
                            lambda window: self._optimize_window(
                                inflated, model, cfg, traj, linearization, u_lin, window, goal
                            ),
                            windows,
                        )
                    )

                inputs = np.array(traj.inputs)
                failed = 0
                for (a, b), outcome in zip(windows, outcomes):
                    failed += outcome.failed
                    if outcome.inputs is not None:
                        inputs[a:b] = outcome.inputs
                failures += failed
                streak = streak + 1 if windows and failed == len(windows) else 0
                if streak >= FAILURE_STREAK_LIMIT:
                    raise PlanningFailureError(
                        f"Every segment failed for {streak} consecutive iterations.",
                        diagnostics={
                            "iteration": iteration,
                            "split_points": list(schedule.W),
                            "cost_history": cost_history,
                            "segment_failures": failures,
                        },
                    )

                before = traj.copy()
                traj.inputs = inputs
                cost = trajectory_cost(traj, goal, cfg)
                cost_history.append(cost)

                if (
                    cfg.auto_merge
                    and iteration >= 2
                    and schedule.mode is SplitMode.ODD
                    and schedule.n_segments > 1
                ):
                    with timer.phase("merge"):
                        threshold = merge_threshold(cfg, traj.horizon, schedule.n_segments)
                        progress = _pair_progress(before, traj, schedule, goal, cfg)
                        merged = merge_step(schedule, progress, threshold)
                    if merged.n_segments < schedule.n_segments:
                        logger.info(
                            f"Merged segments {schedule.n_segments} -> {merged.n_segments} "
                            f"(threshold {threshold:.4f})."
                        )
                    schedule = merged
                segment_history.append(schedule.n_segments)

                change = iter_prog(start_cost, cost)
                calm = calm + 1 if change <= cfg.epsilon(traj.horizon) and not streak else 0
                logger.info(
                    f"sOpt iteration {iteration} ({schedule.mode.value}): cost {cost:.4f}, "
                    f"change {change:.2e}, segments {schedule.n_segments}, failures {failed}."
                )
                # with several segments both modes must stall
                if calm >= min(2, schedule.n_segments):
                    converged = True
                    break
                if iteration == cfg.max_iterations:
                    break

                start_cost = cost
                if cfg.resample:
                    with timer.phase("resample"):
                        candidate, resampled = resample_traj(
                            traj, model, cfg, schedule.n_segments
                        )
                        if resampled and _violation(
                            inflated, model, candidate.waypoints
                        ) > _violation(inflated, model, traj.waypoints) + AUDIT_TOLERANCE:
                            logger.debug("Resampling cuts into an obstacle, keeping the horizon.")
                            resampled = False
                        if resampled and (
                            candidate_cost := trajectory_cost(candidate, goal, cfg)
                        ) > cost + AUDIT_TOLERANCE:
                            logger.debug(
                                f"Resampling raises the cost to {candidate_cost:.4f}, "
                                "keeping the horizon."
                            )
                            resampled = False
                        if resampled:
                            traj = candidate
                            schedule = split_reference(traj, schedule)
                            start_cost = candidate_cost
                linearization = traj.waypoints
                schedule = schedule.advanced()

        with timer.phase("audit"):
            clearance, obstacle_id, point_index = min_clearance(
                inflated, trajectory_points(model, traj.waypoints)
            )
        audit_passed = clearance >= -AUDIT_TOLERANCE
        if not audit_passed:
            logger.warning(
                f"Safety audit failed: clearance {clearance:.2e} against obstacle "
                f"{obstacle_id} at collision point {point_index}."
            )
        if not converged:
            logger.warning(f"sOpt stopped after {iteration} iterations without converging.")

        return PlanResult(
            trajectory=traj,
            cost_history=cost_history,
            segment_count_history=segment_history,
            iterations=iteration,
            converged=converged,
            timings=timer.as_dict(),
            reference_cost=reference_cost,
            initial_segments=cfg.n_segments,
            min_clearance=clearance,
            audit_passed=audit_passed,
            segment_failures=failures,
            schedule=list(schedule.W),
        )
