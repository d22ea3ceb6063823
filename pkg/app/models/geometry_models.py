from typing import Any, List, Optional, Sequence

import numpy as np
from pydantic import Field

from app.constants import LpStatus, Relation

from .base import BaseModel

POINT_KEY_DIGITS = 12


class LpConstraint(BaseModel):
    coefficients: List[float] = Field(..., description="Row of the constraint matrix.")
    relation: Relation = Field(..., description="<=, = or >=.")
    rhs: float = Field(..., description="Right-hand side.")


class LpProblem(BaseModel):
    """Dense linear program; the objective is maximized."""

    objective: List[float] = Field(..., description="Objective coefficients (maximize).")
    constraints: List[LpConstraint] = Field(default_factory=list, description="Linear constraints.")
    nonneg: Optional[List[bool]] = Field(
        None, description="Per-variable non-negativity flag; all variables non-negative when omitted."
    )

    @property
    def n_variables(self) -> int:
        return len(self.objective)


class LpResult(BaseModel):
    status: LpStatus = Field(..., description="Solver outcome.")
    x: Optional[List[float]] = Field(None, description="Optimal solution, if any.")
    objective: Optional[float] = Field(None, description="Optimal objective value, if any.")


class PointSet(BaseModel):
    """Achieved reward vectors with the strategies and weights that produced them."""

    points: List[List[float]] = Field(default_factory=list, description="Reward vectors g.")
    tags: List[Any] = Field(default_factory=list, description="Generating strategy per point.")
    weights: List[List[List[float]]] = Field(
        default_factory=list, description="Weight vectors that produced each point."
    )

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dimension(self) -> Optional[int]:
        return len(self.points[0]) if self.points else None

    def as_array(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, 0))
        return np.asarray(self.points, dtype=float)

    def find(self, point: Sequence[float]) -> Optional[int]:
        key = _point_key(point)
        for i, existing in enumerate(self.points):
            if _point_key(existing) == key:
                return i
        return None

    def add(self, point: Sequence[float], tag: Any = None, weight: Optional[Sequence[float]] = None) -> int:
        """Insert a point (or record another weight for an existing one); returns its index."""
        index = self.find(point)
        if index is None:
            self.points.append([float(v) for v in point])
            self.tags.append(tag)
            self.weights.append([])
            index = len(self.points) - 1
        if weight is not None:
            self.weights[index].append([float(v) for v in weight])
        return index


def _point_key(point: Sequence[float]) -> tuple:
    return tuple(round(float(v), POINT_KEY_DIGITS) for v in point)
