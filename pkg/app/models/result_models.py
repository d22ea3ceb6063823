from typing import List, Optional

from pydantic import Field

from app.constants import Outcome, QueryMode

from .base import BaseModel
from .geometry_models import PointSet
from .strategy_models import CountingStrategy, MixtureStrategy


class ValueState(BaseModel):
    """Final value vectors of one weighted value iteration."""

    x: List[float] = Field(..., description="Weighted value per state.")
    x_i: List[List[float]] = Field(..., description="Per-objective value per state.")
    iterations: int = Field(0, description="Phase-1 sweeps performed.")


class VIResult(BaseModel):
    strategy: CountingStrategy = Field(..., description="Optimal counting strategy.")
    g: List[float] = Field(..., description="Per-objective value at the initial state.")
    weights: List[float] = Field(..., description="Weights that were maximized.")
    weighted_value: float = Field(..., description="Weighted value at the initial state.")
    state: Optional[ValueState] = Field(None, description="Value vectors.")


class TraceEntry(BaseModel):
    weights: List[float] = Field(..., description="Separating weight vector w.")
    point: List[float] = Field(..., description="Achieved vector g for w.")


class SynthesisResult(BaseModel):
    status: Outcome = Field(..., description="achievable, unachievable or undecided.")
    thresholds: List[float] = Field(..., description="Thresholds r that were checked.")
    points: PointSet = Field(default_factory=PointSet, description="Achieved points and strategies.")
    mixture: Optional[List[float]] = Field(None, description="Mixture over points covering r.")
    trace: List[TraceEntry] = Field(default_factory=list, description="Iterates in order.")

    @property
    def achievable(self) -> bool:
        return self.status is Outcome.ACHIEVABLE


class QuantResult(BaseModel):
    status: Outcome = Field(..., description="achievable (value found), unachievable or undecided.")
    value: Optional[float] = Field(None, description="Optimum of the first objective.")
    thresholds: List[float] = Field(..., description="Final threshold vector.")
    points: PointSet = Field(default_factory=PointSet, description="Achieved points and strategies.")
    mixture: Optional[List[float]] = Field(None, description="Mixture attaining the value.")
    trace: List[TraceEntry] = Field(default_factory=list, description="Iterates in order.")
    history: List[float] = Field(default_factory=list, description="Successive values of r1.")


class ParetoApprox(BaseModel):
    status: Outcome = Field(Outcome.ACHIEVABLE, description="undecided when the cap was reached.")
    vertices: List[List[float]] = Field(..., description="Frontier vertices in order.")
    epsilon: float = Field(..., description="Approximation distance.")
    supports: List[List[List[float]]] = Field(
        default_factory=list, description="Weight vectors supporting each vertex."
    )
    points: PointSet = Field(default_factory=PointSet, description="All achieved points.")
    trace: List[TraceEntry] = Field(default_factory=list, description="Iterates in order.")


class SimulationReport(BaseModel):
    labels: List[str] = Field(..., description="Objective names.")
    means: List[float] = Field(..., description="Sample mean per objective.")
    half_widths: List[float] = Field(..., description="95% normal half-width per objective.")
    runs: int = Field(..., description="Number of simulated paths.")
    horizon: int = Field(..., description="Maximum path length.")
    seed: int = Field(..., description="Master seed.")


class QueryReport(BaseModel):
    """Outcome of a query in the user's units."""

    mode: QueryMode = Field(..., description="Query mode.")
    status: Outcome = Field(..., description="Outcome.")
    labels: List[str] = Field(..., description="Objective names.")
    thresholds: Optional[List[float]] = Field(None, description="Thresholds (synth).")
    value: Optional[float] = Field(None, description="Optimum (qnt).")
    vertices: Optional[List[List[float]]] = Field(None, description="Pareto vertices (pareto).")
    points: List[List[float]] = Field(default_factory=list, description="Achieved points.")
    mixture: Optional[List[float]] = Field(None, description="Mixture over points.")
    strategy: Optional[MixtureStrategy] = Field(None, description="Strategy realizing the mixture.")
    trace: List[TraceEntry] = Field(default_factory=list, description="Iterates, in user units.")
    epsilon: float = Field(..., description="Precision used.")
