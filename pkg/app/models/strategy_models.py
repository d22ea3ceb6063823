from typing import Dict, List, Tuple

import pydantic
from pydantic import Field

from app.constants import NatureMode

from .base import BaseModel

Distribution = Dict[str, float]


class CountingStrategy(BaseModel):
    """Deterministic strategy that depends on the state and the number of steps taken.

    The j-th action (j = 1..k_max) is taken from `per_step[j]`; every later action from `tail`.
    Step buckets used for natures and frequencies are 0-based: bucket b < k_max is step b,
    bucket k_max aggregates all later steps.
    """

    per_step: Dict[int, Dict[str, str]] = Field(
        default_factory=dict, description="Step j (1-based) -> state -> action."
    )
    tail: Dict[str, str] = Field(..., description="Memoryless choice after the bounded steps.")
    natures: Dict[int, Dict[str, Distribution]] = Field(
        default_factory=dict,
        description="Worst-case nature recorded per bucket and state for the chosen action.",
    )

    @pydantic.model_validator(mode="after")
    def _check_steps(self) -> "CountingStrategy":
        if self.per_step and sorted(self.per_step) != list(range(1, len(self.per_step) + 1)):
            raise ValueError("per_step must cover steps 1..k_max exactly")
        return self

    @property
    def k_max(self) -> int:
        return len(self.per_step)

    def bucket(self, step: int) -> int:
        return min(step, self.k_max)

    def action(self, state: str, step: int) -> str:
        """Action taken at 0-based step `step`."""
        if step < self.k_max:
            return self.per_step[step + 1][state]
        return self.tail[state]

    def action_in_bucket(self, state: str, bucket: int) -> str:
        return self.action(state, bucket)

    @classmethod
    def memoryless(cls, choice: Dict[str, str], k_max: int = 0) -> "CountingStrategy":
        return cls(per_step={j: dict(choice) for j in range(1, k_max + 1)}, tail=dict(choice))


class MixtureStrategy(BaseModel):
    """Draws one component at the start of each path and follows it forever."""

    components: List[CountingStrategy] = Field(..., min_length=1, description="Component strategies.")
    probabilities: List[float] = Field(..., description="Probability of drawing each component.")

    @pydantic.model_validator(mode="after")
    def _check_distribution(self) -> "MixtureStrategy":
        if len(self.components) != len(self.probabilities):
            raise ValueError("one probability per component")
        if any(p < -1e-12 for p in self.probabilities) or abs(sum(self.probabilities) - 1) > 1e-9:
            raise ValueError("probabilities must form a distribution")
        return self

    @property
    def k_max(self) -> int:
        return max(c.k_max for c in self.components)


class RandomisedCountingStrategy(BaseModel):
    """Randomised strategy indexed by state and step bucket."""

    k_max: int = Field(0, description="Buckets 0..k_max-1 are exact steps, k_max is the tail.")
    probs: Dict[int, Dict[str, Distribution]] = Field(
        ..., description="Bucket -> state -> distribution over enabled actions."
    )

    def bucket(self, step: int) -> int:
        return min(step, self.k_max)

    def distribution(self, state: str, step: int) -> Distribution:
        return self.probs[self.bucket(step)][state]


class NaturePolicy(BaseModel):
    """Fixed, memoryless resolution of interval uncertainty used for frequencies and simulation."""

    mode: NatureMode = Field(NatureMode.ADVERSARIAL, description="How distributions are chosen.")
    seed: int = Field(0, description="Seed of the fixed-vertex mode.")
    witnesses: Dict[Tuple[str, str, int], Distribution] = Field(
        default_factory=dict,
        description="Recorded worst-case distributions per (state, action, bucket).",
    )


class Frequencies(BaseModel):
    """Expected visit counts of (state, step bucket, action) under a strategy and a nature."""

    k_max: int = Field(..., description="Number of exact step buckets.")
    values: Dict[Tuple[str, int, str], float] = Field(..., description="Expected frequencies.")
    enabled: Dict[str, List[str]] = Field(..., description="Enabled actions of the model.")
    mass: List[float] = Field(default_factory=list, description="Unabsorbed mass at each step.")

    def get(self, state: str, bucket: int, action: str) -> float:
        return self.values.get((state, bucket, action), 0.0)
