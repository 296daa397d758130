import itertools

import numpy as np
import pytest

from app.planner.models import QpProblem
from app.planner.services.qpcore import kkt_residual, solve
from app.planner.utils.constants import QpStatus


def enumerate_active_sets(problem: QpProblem) -> float:
    """Best objective over every active set whose KKT point is primal and dual feasible."""
    P, q, G, h, E, d = problem.P, problem.q, problem.G, problem.h, problem.E, problem.d
    n, best = problem.n, np.inf
    for size in range(len(G) + 1):
        for active in itertools.combinations(range(len(G)), size):
            A = np.vstack([E, G[list(active)]])
            b = np.concatenate([d, h[list(active)]])
            matrix = np.block([[P, -A.T], [A, np.zeros((len(A), len(A)))]])
            try:
                solution = np.linalg.solve(matrix, np.concatenate([-q, b]))
            except np.linalg.LinAlgError:
                continue
            u, multipliers = solution[:n], solution[n:]
            if np.abs(E @ u - d).max(initial=0.0) > 1e-8:
                continue
            if np.any(G @ u - h < -1e-9) or np.any(multipliers[len(E) :] < -1e-9):
                continue
            best = min(best, problem.objective(u))
    return best


def random_problem(rng: np.random.Generator) -> QpProblem:
    n = int(rng.integers(1, 7))
    m = int(rng.integers(0, 9))
    p = int(rng.integers(0, min(n, 3)))
    root = rng.normal(size=(n, n))
    P = root @ root.T + 0.1 * np.eye(n)
    feasible = rng.normal(size=n)
    G = rng.normal(size=(m, n))
    h = G @ feasible - rng.uniform(0.0, 1.0, size=m)
    E = rng.normal(size=(p, n))
    return QpProblem(P=P, q=rng.normal(size=n), G=G, h=h, E=E, d=E @ feasible)


def test_clamped_scalar_problem():
    problem = QpProblem(P=[[2.0]], q=[-6.0], G=[[-1.0]], h=[-2.0])
    solution = solve(problem)
    assert solution.status is QpStatus.OPTIMAL
    assert solution.u[0] == pytest.approx(2.0, abs=1e-6)
    assert solution.objective + 9.0 == pytest.approx(1.0, abs=1e-6)


def test_equality_only_symmetric_split():
    problem = QpProblem(P=2 * np.eye(2), q=np.zeros(2), E=[[1.0, 1.0]], d=[1.0])
    solution = solve(problem)
    assert solution.status is QpStatus.OPTIMAL
    np.testing.assert_allclose(solution.u, (0.5, 0.5), atol=1e-9)


def test_unconstrained_problem():
    problem = QpProblem(P=np.diag([2.0, 4.0]), q=[-2.0, -4.0])
    np.testing.assert_allclose(solve(problem).u, (1.0, 1.0), atol=1e-9)


def test_matches_active_set_enumeration():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        problem = random_problem(rng)
        solution = solve(problem)
        assert solution.status is QpStatus.OPTIMAL
        assert solution.objective == pytest.approx(enumerate_active_sets(problem), abs=1e-6)


def test_optimal_solutions_carry_kkt_certificate():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        problem = random_problem(rng)
        solution = solve(problem, tolerance=1e-8)
        assert solution.kkt_residual <= 1e-8
        assert np.all(solution.inequality_duals >= -1e-8)
        assert solution.kkt_residual == pytest.approx(
            kkt_residual(
                problem, solution.u, solution.inequality_duals, solution.equality_duals
            )
        )


def test_redundant_equalities_are_tolerated():
    E = np.array([[1.0, 1.0], [2.0, 2.0]])
    problem = QpProblem(P=2 * np.eye(2), q=np.zeros(2), E=E, d=[1.0, 2.0])
    solution = solve(problem)
    assert solution.status is QpStatus.OPTIMAL
    np.testing.assert_allclose(solution.u, (0.5, 0.5), atol=1e-8)


def test_inconsistent_equalities_are_infeasible():
    E = np.array([[1.0, 1.0], [1.0, 1.0]])
    problem = QpProblem(P=np.eye(2), q=np.zeros(2), E=E, d=[1.0, 2.0])
    assert solve(problem).status is QpStatus.INFEASIBLE


def test_empty_feasible_region_is_infeasible():
    # u >= 1 and -u >= 0
    problem = QpProblem(P=[[1.0]], q=[0.0], G=[[1.0], [-1.0]], h=[1.0, 0.0])
    assert solve(problem, max_iter=100).status is QpStatus.INFEASIBLE


def test_warm_start_reaches_same_optimum():
    rng = np.random.default_rng(3)
    for _ in range(200):
        problem = random_problem(rng)
        cold = solve(problem)
        warm = solve(problem, warm_start=rng.normal(scale=3.0, size=problem.n))
        assert cold.status is warm.status is QpStatus.OPTIMAL
        assert warm.objective == pytest.approx(cold.objective, abs=1e-8)


def test_polished_solution_sits_on_active_rows():
    problem = QpProblem(P=2 * np.eye(2), q=[-6.0, 0.0], G=[[-1.0, 0.0]], h=[-2.0])
    solution = solve(problem, tolerance=1e-4)
    np.testing.assert_allclose(solution.u, (2.0, 0.0), atol=1e-12)
    assert solution.kkt_residual < 1e-12


def test_problem_validation():
    with pytest.raises(ValueError):
        QpProblem(P=[[1.0, 2.0], [0.0, 1.0]], q=[0.0, 0.0])
    with pytest.raises(ValueError):
        QpProblem(P=np.eye(2), q=[0.0, 0.0], G=[[1.0, 0.0]], h=[1.0, 2.0])
    with pytest.raises(ValueError):
        solve(QpProblem(P=np.eye(1), q=[0.0]), tolerance=0.0)
