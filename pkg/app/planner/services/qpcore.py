"""Dense convex QP solver (Mehrotra predictor-corrector interior point).

Solves  minimize 1/2 u'Pu + q'u  s.t.  G u >= h,  E u = d
with equalities kept as equalities in the reduced KKT system. A converged
iterate is polished by re-solving on its active set.
"""

import logging

import numpy as np
import scipy.linalg

from app.planner.models import QpProblem, QpSolution
from app.planner.utils.constants import (
    QP_DEFAULT_MAX_ITER,
    QP_DEFAULT_TOLERANCE,
    QP_DIVERGENCE_LIMIT,
    QP_STEP_FRACTION,
    QpStatus,
)

logger = logging.getLogger(__name__)


def _independent_equalities(
    E: np.ndarray, d: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
    """Drop linearly dependent rows of E; report whether E u = d is consistent."""
    if len(E) == 0:
        return E, d, np.zeros(0, dtype=int), True

    _, r, pivots = scipy.linalg.qr(E.T, mode="economic", pivoting=True)
    diagonal = np.abs(np.diag(r))
    threshold = max(E.shape) * np.finfo(float).eps * (diagonal[0] if diagonal.size else 0.0)
    rank = int(np.sum(diagonal > max(threshold, 1e-14)))
    keep = np.sort(pivots[:rank])

    u_ls = np.linalg.lstsq(E, d, rcond=None)[0]
    consistent = np.linalg.norm(E @ u_ls - d, np.inf) <= 1e-9 * (1.0 + np.linalg.norm(d, np.inf))
    return E[keep], d[keep], keep, bool(consistent)


def kkt_residual(
    problem: QpProblem, u: np.ndarray, mu: np.ndarray, nu: np.ndarray
) -> float:
    """Largest of stationarity, primal violation and complementarity residuals."""
    stationarity = problem.P @ u + problem.q - problem.G.T @ mu - problem.E.T @ nu
    values = [np.linalg.norm(stationarity, np.inf)]
    if len(problem.G):
        margin = problem.G @ u - problem.h
        values.append(max(0.0, float(-margin.min())))
        values.append(float(np.abs(mu * margin).max()))
        values.append(max(0.0, float(-mu.min())))
    if len(problem.E):
        values.append(float(np.linalg.norm(problem.E @ u - problem.d, np.inf)))
    return float(max(values))


def _solve_kkt(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.solve(matrix, rhs, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        return np.linalg.lstsq(matrix, rhs, rcond=None)[0]


def _boundary_step(s: np.ndarray, ds: np.ndarray, mu: np.ndarray, dmu: np.ndarray) -> float:
    step = 1.0
    for value, delta in ((s, ds), (mu, dmu)):
        shrinking = delta < 0
        if np.any(shrinking):
            step = min(step, float(np.min(-value[shrinking] / delta[shrinking])))
    return step


def _equality_only(problem: QpProblem, E: np.ndarray, d: np.ndarray, keep: np.ndarray, tolerance: float) -> QpSolution:
    n, p = problem.n, len(E)
    matrix = np.block([[problem.P, E.T], [E, np.zeros((p, p))]])
    solution = _solve_kkt(matrix, np.concatenate([-problem.q, d]))
    u = solution[:n]
    nu = np.zeros(len(problem.E))
    nu[keep] = -solution[n:]
    residual = kkt_residual(problem, u, np.zeros(0), nu)
    status = QpStatus.OPTIMAL if residual <= tolerance else QpStatus.MAX_ITER
    return QpSolution(
        u=u,
        objective=problem.objective(u),
        status=status,
        kkt_residual=residual,
        iterations=1,
        equality_duals=nu,
    )


def _polish(
    problem: QpProblem, E: np.ndarray, d: np.ndarray, keep: np.ndarray, u: np.ndarray, mu: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Re-solve with the guessed active rows as equalities; exact when the guess is right."""
    G, h, n = problem.G, problem.h, problem.n
    active = mu > G @ u - h
    A = np.vstack([G[active], E])
    b = np.concatenate([h[active], d])
    size = len(A)
    matrix = np.block([[problem.P, -A.T], [A, np.zeros((size, size))]])
    solution = np.linalg.lstsq(matrix, np.concatenate([-problem.q, b]), rcond=None)[0]

    polished_mu = np.zeros(len(G))
    polished_mu[active] = solution[n : n + int(active.sum())]
    polished_nu = np.zeros(len(problem.E))
    polished_nu[keep] = solution[n + int(active.sum()) :]
    candidate = solution[:n]
    residual = kkt_residual(problem, candidate, polished_mu, polished_nu)
    return candidate, polished_mu, polished_nu, residual


def solve(
    problem: QpProblem,
    tolerance: float = QP_DEFAULT_TOLERANCE,
    max_iter: int = QP_DEFAULT_MAX_ITER,
    warm_start: np.ndarray | None = None,
) -> QpSolution:
    if not tolerance > 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}.")

    n = problem.n
    P, q, G, h = problem.P, problem.q, problem.G, problem.h
    E, d, keep, consistent = _independent_equalities(problem.E, problem.d)

    if not consistent:
        logger.debug("QP equalities are inconsistent.")
        u = np.linalg.lstsq(problem.E, problem.d, rcond=None)[0]
        return QpSolution(
            u=u,
            objective=problem.objective(u),
            status=QpStatus.INFEASIBLE,
            kkt_residual=float("inf"),
        )

    m, p = len(G), len(E)
    if m == 0:
        return _equality_only(problem, E, d, keep, tolerance)

    u = np.zeros(n) if warm_start is None else np.asarray(warm_start, dtype=float).copy()
    s = np.maximum(G @ u - h, 1.0)
    mu = np.ones(m)
    nu = np.zeros(p)
    full_nu = np.zeros(len(problem.E))

    status = QpStatus.MAX_ITER
    iteration = 0
    for iteration in range(1, max_iter + 1):
        full_nu[keep] = nu
        if kkt_residual(problem, u, mu, full_nu) <= tolerance:
            status = QpStatus.OPTIMAL
            break
        if (
            not (np.all(np.isfinite(u)) and np.all(np.isfinite(mu)))
            or np.abs(u).max(initial=0.0) > QP_DIVERGENCE_LIMIT
            or mu.max() > QP_DIVERGENCE_LIMIT
        ):
            status = QpStatus.INFEASIBLE
            break

        r_dual = P @ u + q - G.T @ mu - E.T @ nu
        r_primal = G @ u - s - h
        r_equality = E @ u - d
        gap = float(s @ mu) / m

        scaling = mu / s
        reduced = P + G.T @ (scaling[:, None] * G)
        matrix = np.block([[reduced, E.T], [E, np.zeros((p, p))]])
        factor = scipy.linalg.lu_factor(matrix)

        def newton(r_comp: np.ndarray) -> tuple[np.ndarray, ...]:
            rhs = -r_dual + G.T @ ((-r_comp - mu * r_primal) / s)
            solution = scipy.linalg.lu_solve(factor, np.concatenate([rhs, -r_equality]))
            du = solution[:n]
            ds = G @ du + r_primal
            dmu = (-r_comp - mu * ds) / s
            return du, ds, dmu, -solution[n:]

        du, ds, dmu, _ = newton(s * mu)
        alpha = _boundary_step(s, ds, mu, dmu)
        gap_affine = float((s + alpha * ds) @ (mu + alpha * dmu)) / m
        sigma = (gap_affine / gap) ** 3 if gap > 0 else 0.0

        du, ds, dmu, dnu = newton(s * mu + ds * dmu - sigma * gap)
        alpha = min(1.0, QP_STEP_FRACTION * _boundary_step(s, ds, mu, dmu))

        u = u + alpha * du
        s = s + alpha * ds
        mu = mu + alpha * dmu
        nu = nu + alpha * dnu
    else:
        full_nu[keep] = nu
        primal = float(np.abs(G @ u - s - h).max(initial=0.0))
        if not np.isfinite(primal) or primal > max(np.sqrt(tolerance), 1e-6) * (
            1.0 + np.abs(h).max(initial=0.0)
        ):
            status = QpStatus.INFEASIBLE

    full_nu[keep] = nu
    residual = kkt_residual(problem, u, mu, full_nu)
    if status is not QpStatus.INFEASIBLE:
        polished = _polish(problem, E, d, keep, u, mu)
        if polished[3] <= residual:
            u, mu, full_nu, residual = polished
        if residual <= tolerance:
            status = QpStatus.OPTIMAL
    if status is not QpStatus.OPTIMAL:
        logger.debug(f"QP finished with status {status.value} (residual {residual:.2e}).")
    return QpSolution(
        u=u,
        objective=problem.objective(u),
        status=status,
        kkt_residual=residual,
        iterations=iteration,
        inequality_duals=mu,
        equality_duals=full_nu,
    )
