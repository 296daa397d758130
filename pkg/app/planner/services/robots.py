import logging
import threading
from typing import Any

import numpy as np
from cachetools import LRUCache, cached
from cachetools.keys import hashkey

from app.planner.models import RobotModel
from app.planner.utils.errors import DimensionError

logger = logging.getLogger(__name__)

_jacobian_cache: LRUCache = LRUCache(maxsize=256)
_jacobian_lock = threading.Lock()


def _check_state(model: RobotModel, z: Any) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (model.state_dim,):
        raise DimensionError(
            f"{model.kind.value} expects a state of size {model.state_dim}, got shape {z.shape}."
        )
    return z


def _split_inputs(model: RobotModel, u: Any) -> np.ndarray:
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size == 0 or u.size % model.input_dim:
        raise DimensionError(
            f"Stacked inputs of length {u.size} are not a positive multiple of "
            f"input_dim={model.input_dim}."
        )
    return u.reshape(-1, model.input_dim)


def step(model: RobotModel, z: Any, u: Any) -> np.ndarray:
    z = _check_state(model, z)
    u = np.asarray(u, dtype=float)
    if u.shape != (model.input_dim,):
        raise DimensionError(
            f"{model.kind.value} expects an input of size {model.input_dim}, got shape {u.shape}."
        )
    return model.advance(z, u)


def rollout(model: RobotModel, z0: Any, u: Any) -> np.ndarray:
    """Stacked states [z1, ..., zH] reached from z0 under stacked inputs u."""
    z0 = _check_state(model, z0)
    return model.rollout_states(z0, _split_inputs(model, u)).reshape(-1)


@cached(
    cache=_jacobian_cache,
    key=lambda model, steps: hashkey(model, steps),
    lock=_jacobian_lock,
)
def _linear_rollout_jacobian(model: RobotModel, steps: int) -> np.ndarray:
    a, b = model.transition
    n, m = model.state_dim, model.input_dim
    jacobian = np.zeros((steps * n, steps * m))
    block_row = np.zeros((n, steps * m))
    for t in range(steps):
        block_row = a @ block_row
        block_row[:, t * m : (t + 1) * m] = b
        jacobian[t * n : (t + 1) * n] = block_row
    jacobian.setflags(write=False)
    return jacobian


def rollout_jacobian(model: RobotModel, z0: Any, u: Any) -> np.ndarray:
    """d(stacked states)/d(stacked inputs), block lower triangular.

    Both models are linear in (z, u) so the result only depends on the step count
    and is cached per (model, steps).
    """
    _check_state(model, z0)
    steps = len(_split_inputs(model, u))
    return _linear_rollout_jacobian(model, steps)


def free_response(model: RobotModel, z0: Any, steps: int) -> np.ndarray:
    """States reached with zero input, shape (steps, state_dim)."""
    return model.rollout_states(_check_state(model, z0), np.zeros((steps, model.input_dim)))


def collision_points(model: RobotModel, z: Any) -> np.ndarray:
    z = _check_state(model, z)
    return model.collision_points_batch(model.configuration_of(z))[0]


def collision_points_jacobian(model: RobotModel, z: Any) -> np.ndarray:
    """One (2, state_dim) matrix per collision point."""
    return model.collision_points_jacobian(_check_state(model, z))


def trajectory_points(model: RobotModel, states: np.ndarray) -> np.ndarray:
    """Collision points of every state, flattened to (states * points, 2)."""
    states = np.asarray(states, dtype=float).reshape(-1, model.state_dim)
    return model.collision_points_batch(model.configuration_of(states)).reshape(-1, 2)
