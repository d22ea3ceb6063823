from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog

from app.config import LP_TOLERANCE, SEPARATION_FLOOR
from app.constants import LpStatus, Relation
from app.errors import ConvergenceError, DimensionMismatchError, MixtureInfeasibleError, SeparationError
from app.models.geometry_models import LpConstraint, LpProblem, LpResult, PointSet
from app.utils.logging import get_logger

logger = get_logger("geometry", "lp")

Points = Union[PointSet, Sequence[Sequence[float]], np.ndarray]

_STATUS = {0: LpStatus.OPTIMAL, 2: LpStatus.INFEASIBLE, 3: LpStatus.UNBOUNDED}


def solve_lp(problem: LpProblem, tolerance: float = LP_TOLERANCE) -> LpResult:
    """
    Solve a dense LP with the HiGHS dual simplex behind scipy.

    Args:
        problem (LpProblem): Objective (maximized), constraints and sign restrictions.
        tolerance (float): Primal and dual feasibility tolerance.

    Returns:
        LpResult: optimal with solution, or infeasible/unbounded without one.
    """
    n = problem.n_variables
    nonneg = problem.nonneg if problem.nonneg is not None else [True] * n
    if len(nonneg) != n:
        raise DimensionMismatchError(f"nonneg has {len(nonneg)} flags for {n} variables")

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for constraint in problem.constraints:
        if len(constraint.coefficients) != n:
            raise DimensionMismatchError(
                f"constraint has {len(constraint.coefficients)} coefficients for {n} variables"
            )
        if constraint.relation is Relation.LE:
            a_ub.append(constraint.coefficients)
            b_ub.append(constraint.rhs)
        elif constraint.relation is Relation.GE:
            a_ub.append([-c for c in constraint.coefficients])
            b_ub.append(-constraint.rhs)
        else:
            a_eq.append(constraint.coefficients)
            b_eq.append(constraint.rhs)

    result = linprog(
        c=[-c for c in problem.objective],
        A_ub=a_ub or None,
        b_ub=b_ub or None,
        A_eq=a_eq or None,
        b_eq=b_eq or None,
        bounds=[(0, None) if flag else (None, None) for flag in nonneg],
        method="highs",
        options={
            "presolve": False,
            "primal_feasibility_tolerance": tolerance,
            "dual_feasibility_tolerance": tolerance,
        },
    )
    status = _STATUS.get(result.status)
    if status is None:
        logger.error("LP solver failed", status=result.status, message=result.message)
        raise ConvergenceError(f"LP solver failed: {result.message}")
    if status is not LpStatus.OPTIMAL:
        return LpResult(status=status)
    return LpResult(status=status, x=list(result.x), objective=float(-result.fun))


def as_matrix(points: Points) -> np.ndarray:
    if isinstance(points, PointSet):
        return points.as_array()
    matrix = np.asarray(points, dtype=float)
    if matrix.size == 0:
        return np.zeros((0, 0))
    return matrix.reshape(len(matrix), -1)


def _check_dimension(matrix: np.ndarray, r: np.ndarray) -> None:
    if len(matrix) and matrix.shape[1] != len(r):
        raise DimensionMismatchError(f"points have dimension {matrix.shape[1]}, vector has {len(r)}")


def max_min_slack(points: Points, r: Sequence[float]) -> Tuple[float, np.ndarray]:
    """Best convex combination of the points measured by its smallest slack over r.

    Returns the optimal slack t and the combination; t >= 0 iff r is in the downward closure.
    """
    matrix = as_matrix(points)
    r = np.asarray(r, dtype=float)
    _check_dimension(matrix, r)
    m, n = matrix.shape
    # variables: lambda_1..lambda_m, t
    constraints = [
        LpConstraint(coefficients=[*matrix[:, j], -1.0], relation=Relation.GE, rhs=float(r[j]))
        for j in range(n)
    ]
    constraints.append(LpConstraint(coefficients=[1.0] * m + [0.0], relation=Relation.EQ, rhs=1.0))
    result = solve_lp(
        LpProblem(objective=[0.0] * m + [1.0], constraints=constraints, nonneg=[True] * m + [False])
    )
    if result.status is not LpStatus.OPTIMAL:
        raise ConvergenceError(f"membership LP ended {result.status.value}")
    return result.x[-1], np.asarray(result.x[:-1])


def in_downward_closure(points: Points, r: Sequence[float], tolerance: float = LP_TOLERANCE) -> bool:
    """Whether r is dominated by a convex combination of the points."""
    matrix = as_matrix(points)
    if len(matrix) == 0:
        return False
    slack, _ = max_min_slack(matrix, r)
    return slack >= -tolerance


def separating_weight(
    points: Points,
    r: Sequence[float],
    positive_coord: Optional[int] = None,
    floor: float = SEPARATION_FLOOR,
    strict: bool = True,
) -> np.ndarray:
    """
    Weight vector maximizing the margin by which r beats every point.

    Args:
        points (Points): Achieved points X.
        r (Sequence[float]): Vector to separate from dwc(X).
        positive_coord (Optional[int]): Coordinate forced to weight at least `floor`.
        floor (float): Lower bound for the forced coordinate.
        strict (bool): Raise when r lies strictly inside the closure.

    Returns:
        np.ndarray: Weight vector on the simplex.

    Raises:
        SeparationError: If `strict` and the best margin is negative.
    """
    r = np.asarray(r, dtype=float)
    n = len(r)
    matrix = as_matrix(points)
    if len(matrix) == 0:
        return np.full(n, 1.0 / n)
    _check_dimension(matrix, r)

    # variables: w_1..w_n, t
    constraints = [
        LpConstraint(coefficients=[*(r - point), -1.0], relation=Relation.GE, rhs=0.0)
        for point in matrix
    ]
    constraints.append(LpConstraint(coefficients=[1.0] * n + [0.0], relation=Relation.EQ, rhs=1.0))
    if positive_coord is not None:
        row = [0.0] * (n + 1)
        row[positive_coord] = 1.0
        constraints.append(LpConstraint(coefficients=row, relation=Relation.GE, rhs=floor))
    result = solve_lp(
        LpProblem(objective=[0.0] * n + [1.0], constraints=constraints, nonneg=[True] * n + [False])
    )
    if result.status is not LpStatus.OPTIMAL:
        raise SeparationError(f"separation LP ended {result.status.value}")
    margin = result.x[-1]
    if strict and margin < -LP_TOLERANCE:
        raise SeparationError(f"vector lies inside the downward closure (margin {margin})")
    w = np.clip(np.asarray(result.x[:-1]), 0.0, None)
    return w / w.sum()


def mixture_weights(points: Points, r: Sequence[float], tolerance: float = LP_TOLERANCE) -> np.ndarray:
    """Distribution over the points whose combination dominates r with the largest minimum slack."""
    matrix = as_matrix(points)
    if len(matrix) == 0:
        raise MixtureInfeasibleError("no points to mix")
    slack, weights = max_min_slack(matrix, r)
    if slack < -tolerance:
        raise MixtureInfeasibleError(f"points do not cover the thresholds (slack {slack})")
    weights = np.clip(weights, 0.0, None)
    return weights / weights.sum()


def max_first_coordinate(points: Points, rest: Sequence[float]) -> Optional[float]:
    """Largest r' with (r', *rest) in the downward closure, or None if rest is not covered."""
    matrix = as_matrix(points)
    if len(matrix) == 0:
        return None
    rest = np.asarray(rest, dtype=float)
    _check_dimension(matrix[:, 1:], rest)
    m = len(matrix)
    constraints = [
        LpConstraint(coefficients=list(matrix[:, j + 1]), relation=Relation.GE, rhs=float(rest[j]))
        for j in range(len(rest))
    ]
    constraints.append(LpConstraint(coefficients=[1.0] * m, relation=Relation.EQ, rhs=1.0))
    result = solve_lp(LpProblem(objective=list(matrix[:, 0]), constraints=constraints))
    if result.status is not LpStatus.OPTIMAL:
        return None
    return result.objective
