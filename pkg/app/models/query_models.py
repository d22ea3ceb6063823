from typing import Any, Dict, List, Optional, Sequence, Tuple

import pydantic
from pydantic import Field

from app.constants import Direction, ObjectiveKind, QueryMode, Relation
from app.utils.numbers import parse_bound, parse_probability

from .base import BaseModel
from .imdp_models import Imdp


class Objective(BaseModel):
    """A reachability predicate [T]<=k ~ p or a reward predicate [r]<=k ~ r."""

    kind: ObjectiveKind = Field(..., description="reach or reward.")
    target: List[str] = Field(default_factory=list, description="Target states (reach only).")
    structure: Optional[str] = Field(None, description="Reward structure name (reward only).")
    op: Relation = Field(Relation.GE, description=">= or <=.")
    threshold: float = Field(0.0, description="Probability or reward threshold.")
    step_bound: Optional[int] = Field(None, description="Step bound k; None means unbounded.")

    @pydantic.field_validator("threshold", mode="before")
    @classmethod
    def _parse_threshold(cls, value: Any) -> float:
        return parse_probability(value)

    @pydantic.field_validator("step_bound", mode="before")
    @classmethod
    def _parse_bound(cls, value: Any) -> Optional[int]:
        return parse_bound(value)

    @pydantic.model_validator(mode="after")
    def _check_kind(self) -> "Objective":
        if self.op is Relation.EQ:
            raise ValueError("objectives compare with >= or <=")
        if self.kind is ObjectiveKind.REACH:
            if not self.target:
                raise ValueError("reachability objective needs a target set")
            if not 0.0 <= self.threshold <= 1.0:
                raise ValueError("reachability threshold must lie in [0, 1]")
        elif not self.structure:
            raise ValueError("reward objective needs a reward structure")
        return self

    @property
    def label(self) -> str:
        bound = "inf" if self.step_bound is None else str(self.step_bound)
        if self.kind is ObjectiveKind.REACH:
            return f"P[F<={bound} {{{','.join(self.target)}}}]"
        return f"R{{{self.structure}}}[<={bound}]"


class Query(BaseModel):
    """Synthesis, quantitative or Pareto query over a list of objectives."""

    mode: QueryMode = Field(QueryMode.SYNTH, description="synth, qnt or pareto.")
    objectives: List[Objective] = Field(..., min_length=1, description="Objectives in order.")
    qnt_index: int = Field(0, description="Optimized objective (qnt only).")
    direction: Direction = Field(Direction.MAX, description="Optimization direction (qnt only).")
    directions: List[Direction] = Field(
        default_factory=list, description="Per-objective directions (pareto only)."
    )
    epsilon: Optional[float] = Field(None, description="Value-iteration precision override.")
    max_iters: Optional[int] = Field(None, description="Driver iteration cap override.")

    @pydantic.model_validator(mode="after")
    def _check_mode(self) -> "Query":
        if self.mode is QueryMode.QNT and not 0 <= self.qnt_index < len(self.objectives):
            raise ValueError("qnt_index out of range")
        if self.mode is QueryMode.PARETO:
            if len(self.objectives) != 2:
                raise ValueError("Pareto queries take exactly 2 objectives")
            if self.directions and len(self.directions) != 2:
                raise ValueError("Pareto queries take one direction per objective")
        return self


class BasicQuery(BaseModel):
    """Lower-bounded expected total reward predicates on a transformed model."""

    model: Imdp = Field(..., description="Product model.")
    structures: List[str] = Field(..., description="Reward structure per objective.")
    bounds: List[Optional[int]] = Field(..., description="Step bound per objective; None is unbounded.")
    thresholds: List[float] = Field(..., description="Lower threshold per objective.")
    signs: List[int] = Field(
        default_factory=list, description="+1, or -1 where the original objective was negated."
    )
    labels: List[str] = Field(default_factory=list, description="Human readable objective names.")
    back_map: Dict[str, Tuple[str, Tuple[int, ...]]] = Field(
        default_factory=dict, description="Product state -> (original state, reached targets)."
    )

    @pydantic.model_validator(mode="after")
    def _fill_defaults(self) -> "BasicQuery":
        n = len(self.structures)
        if len(self.bounds) != n or len(self.thresholds) != n:
            raise ValueError("structures, bounds and thresholds must have equal length")
        if not self.signs:
            self.signs = [1] * n
        if not self.labels:
            self.labels = list(self.structures)
        return self

    @property
    def n_objectives(self) -> int:
        return len(self.structures)

    @property
    def k_max(self) -> int:
        finite = [k for k in self.bounds if k is not None]
        return max(finite, default=0)

    def permuted(self, order: Sequence[int]) -> "BasicQuery":
        return self.model_copy(
            update={
                "structures": [self.structures[i] for i in order],
                "bounds": [self.bounds[i] for i in order],
                "thresholds": [self.thresholds[i] for i in order],
                "signs": [self.signs[i] for i in order],
                "labels": [self.labels[i] for i in order],
            }
        )

    def with_thresholds(self, thresholds: Sequence[float]) -> "BasicQuery":
        return self.model_copy(update={"thresholds": [float(t) for t in thresholds]})

    def to_user_units(self, vector: Sequence[float]) -> List[float]:
        return [s * float(v) for s, v in zip(self.signs, vector, strict=True)]
