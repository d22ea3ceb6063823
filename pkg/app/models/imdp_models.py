from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple

import pydantic
from pydantic import Field, PrivateAttr

from app.errors import UnknownStateError

from .base import BaseModel

StateAction = Tuple[str, str]


class IntervalEntry(BaseModel):
    """One listed transition of an interval row."""

    model_config = pydantic.ConfigDict(frozen=True)

    target: str = Field(..., description="Successor state id.")
    lower: float = Field(..., description="Lower probability bound.")
    upper: float = Field(..., description="Upper probability bound.")


class IntervalRow(BaseModel):
    """Interval transition probabilities of one state-action pair."""

    model_config = pydantic.ConfigDict(frozen=True)

    entries: List[IntervalEntry] = Field(..., description="Listed successors; others have probability 0.")

    @classmethod
    def from_bounds(cls, bounds: Mapping[str, Tuple[float, float]]) -> "IntervalRow":
        return cls(
            entries=[IntervalEntry(target=t, lower=lo, upper=hi) for t, (lo, hi) in bounds.items()]
        )

    @property
    def targets(self) -> List[str]:
        return [entry.target for entry in self.entries]

    def bounds(self) -> Dict[str, Tuple[float, float]]:
        return {entry.target: (entry.lower, entry.upper) for entry in self.entries}


class Violation(BaseModel):
    """A broken model or query rule, reported as data."""

    rule: str = Field(..., description="Short machine-readable rule name.")
    message: str = Field(..., description="Human readable explanation.")
    state: Optional[str] = Field(None, description="Offending state, if any.")
    action: Optional[str] = Field(None, description="Offending action, if any.")


class Sec(BaseModel):
    """Strong end-component: closed under every feasible distribution and strongly connected."""

    states: List[str] = Field(..., description="State subset, in model order.")
    actions: Dict[str, List[str]] = Field(..., description="Actions kept inside the component per state.")


class Imdp(BaseModel):
    """Interval Markov decision process.

    Rows of every state-action pair are kept sorted by target state index so that tie-breaking
    on entry order equals tie-breaking on state index.
    """

    model_config = pydantic.ConfigDict(frozen=True, arbitrary_types_allowed=True)

    states: List[str] = Field(..., description="Ordered state ids.")
    initial: str = Field(..., description="Initial state id.")
    actions: List[str] = Field(..., description="Global ordered action list.")
    enabled: Dict[str, List[str]] = Field(..., description="Enabled actions per state.")
    transitions: Dict[StateAction, IntervalRow] = Field(
        ..., description="Interval row per enabled state-action pair."
    )
    rewards: Dict[str, Dict[StateAction, float]] = Field(
        default_factory=dict, description="Named reward structures; missing entries read as 0."
    )

    _index: Optional[Dict[str, int]] = PrivateAttr(default=None)
    _compiled: Any = PrivateAttr(default=None)

    @pydantic.model_validator(mode="before")
    @classmethod
    def _sort_rows(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "transitions" not in data or "states" not in data:
            return data
        position = {s: i for i, s in enumerate(data["states"])}
        rows = {}
        for key, row in data["transitions"].items():
            if isinstance(row, dict):
                row = IntervalRow.model_validate(row)
            entries = sorted(row.entries, key=lambda e: position.get(e.target, len(position)))
            rows[key] = IntervalRow(entries=entries)
        return {**data, "transitions": rows}

    def model_copy(self, *, update: Optional[Mapping[str, Any]] = None, deep: bool = False) -> "Imdp":
        copy = super().model_copy(update=update, deep=deep)
        # cached views belong to the original
        copy._index = None
        copy._compiled = None
        return copy

    def state_index(self) -> Dict[str, int]:
        if self._index is None:
            self._index = {s: i for i, s in enumerate(self.states)}
        return self._index

    def index_of(self, state: str) -> int:
        try:
            return self.state_index()[state]
        except KeyError:
            raise UnknownStateError(state) from None

    def row(self, state: str, action: str) -> IntervalRow:
        return self.transitions[(state, action)]

    def reward(self, structure: str, state: str, action: str) -> float:
        return self.rewards.get(structure, {}).get((state, action), 0.0)

    def rows(self) -> Iterator[Tuple[str, str, IntervalRow]]:
        """Iterate (state, action, row) in state order, then enabled-action order."""
        for state in self.states:
            for action in self.enabled.get(state, []):
                yield state, action, self.transitions[(state, action)]

    @property
    def n_rows(self) -> int:
        return sum(len(self.enabled.get(s, [])) for s in self.states)


class FeasibleDistribution(BaseModel):
    """A distribution inside the feasible set of an interval row."""

    probs: Dict[str, float] = Field(..., description="Probability per target state.")

    def dot(self, values: Mapping[str, float]) -> float:
        return sum(p * values[t] for t, p in self.probs.items())
