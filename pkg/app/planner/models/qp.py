from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from app.planner.utils.constants import QpStatus


def _matrix(value: np.ndarray | None, columns: int) -> np.ndarray:
    if value is None:
        return np.zeros((0, columns))
    return np.asarray(value, dtype=float).reshape(-1, columns)


def _vector(value: np.ndarray | None) -> np.ndarray:
    if value is None:
        return np.zeros(0)
    return np.asarray(value, dtype=float).reshape(-1)


@dataclass
class QpProblem:
    """minimize 1/2 u'Pu + q'u  subject to  G u >= h,  E u = d."""

    P: np.ndarray
    q: np.ndarray
    G: np.ndarray | None = None
    h: np.ndarray | None = None
    E: np.ndarray | None = None
    d: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.P = np.asarray(self.P, dtype=float)
        self.q = _vector(self.q)
        n = self.q.size
        if self.P.shape != (n, n):
            raise ValueError(f"P must be {n}x{n}, got {self.P.shape}.")
        if not np.allclose(self.P, self.P.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(self.P).max())):
            raise ValueError("P must be symmetric.")
        self.G, self.h = _matrix(self.G, n), _vector(self.h)
        self.E, self.d = _matrix(self.E, n), _vector(self.d)
        if len(self.G) != self.h.size or len(self.E) != self.d.size:
            raise ValueError("Constraint matrices and right-hand sides disagree in size.")

    @property
    def n(self) -> int:
        return self.q.size

    def objective(self, u: np.ndarray) -> float:
        return float(0.5 * u @ self.P @ u + self.q @ u)


@dataclass
class QpSolution:
    u: np.ndarray
    objective: float
    status: QpStatus
    kkt_residual: float
    iterations: int = 0
    inequality_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    equality_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
