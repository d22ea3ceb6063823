from typing import Dict, List, Optional, Union

import numpy as np

from app.constants import Direction, NatureMode
from app.imdp.compiled import CompiledImdp
from app.imdp.robust import robust_extremum_rows
from app.models.strategy_models import (
    CountingStrategy,
    Distribution,
    NaturePolicy,
    RandomisedCountingStrategy,
)
from app.utils.logging import get_logger

logger = get_logger("strategy", "policies")

PolicyStrategy = Union[CountingStrategy, RandomisedCountingStrategy]


def adversarial_policy(strategy: CountingStrategy) -> NaturePolicy:
    """Nature that replays the worst-case distributions recorded by value iteration."""
    witnesses = {}
    for bucket, per_state in strategy.natures.items():
        for state, dist in per_state.items():
            action = strategy.action_in_bucket(state, int(bucket))
            witnesses[(state, action, int(bucket))] = dict(dist)
    return NaturePolicy(mode=NatureMode.ADVERSARIAL, witnesses=witnesses)


def row_policy(compiled: CompiledImdp, strategy: PolicyStrategy, bucket: int) -> np.ndarray:
    """
    Probability of choosing each row of the compiled model at the given step bucket.

    Buckets at or beyond the strategy's own k_max use its tail choice. States a randomised
    strategy does not mention choose uniformly among their enabled actions.
    """
    rho = np.zeros(compiled.n_rows)
    for s, state in enumerate(compiled.state_ids):
        rows = compiled.state_rows(s)
        if isinstance(strategy, CountingStrategy):
            action = strategy.action(state, bucket) if state in strategy.tail else None
            if action is None:
                rho[rows.start] = 1.0
            else:
                rho[compiled.row_of(s, action)] = 1.0
            continue
        dist = strategy.probs.get(strategy.bucket(bucket), {}).get(state)
        if not dist:
            rho[rows.start : rows.stop] = 1.0 / len(rows)
            continue
        for action, p in dist.items():
            rho[compiled.row_of(s, action)] = p
    return rho


def midpoint_witnesses(compiled: CompiledImdp) -> np.ndarray:
    slack = compiled.upper - compiled.lower
    total_lower = compiled.lower.sum(axis=1)
    total_slack = slack.sum(axis=1)
    theta = np.divide(
        1.0 - total_lower, total_slack, out=np.zeros_like(total_slack), where=total_slack > 0
    )
    return compiled.lower + theta[:, None] * slack


class NatureResolver:
    """Witness matrices (aligned with `compiled.targets`) of a memoryless nature, per bucket."""

    def __init__(self, compiled: CompiledImdp, policy: NaturePolicy, k_max: int = 0) -> None:
        self.compiled = compiled
        self.policy = policy
        self.k_max = k_max
        self._cache: Dict[int, np.ndarray] = {}
        self._midpoint = midpoint_witnesses(compiled)

    def witnesses(self, bucket: int) -> np.ndarray:
        bucket = min(bucket, self.k_max)
        if bucket not in self._cache:
            self._cache[bucket] = self._build(bucket)
        return self._cache[bucket]

    def _build(self, bucket: int) -> np.ndarray:
        mode = self.policy.mode
        if mode is NatureMode.MIDPOINT:
            return self._midpoint
        if mode is NatureMode.FIXED_VERTEX:
            rng = np.random.default_rng(self.policy.seed)
            values = rng.random(self.compiled.n_states)
            _, probs = robust_extremum_rows(self.compiled, values, Direction.MIN)
            return probs

        probs = self._midpoint.copy()
        missing = 0
        for r in range(self.compiled.n_rows):
            state = self.compiled.state_ids[self.compiled.row_state[r]]
            action = self.compiled.row_action[r]
            dist = self._lookup(state, action, bucket)
            if dist is None:
                missing += 1
                continue
            targets = self.compiled.targets[r][self.compiled.mask[r]]
            probs[r, : len(targets)] = [dist.get(self.compiled.state_ids[t], 0.0) for t in targets]
        if missing:
            logger.debug("Rows without a recorded witness use the midpoint", bucket=bucket, rows=missing)
        return probs

    def _lookup(self, state: str, action: str, bucket: int) -> Optional[Distribution]:
        witnesses = self.policy.witnesses
        dist = witnesses.get((state, action, bucket))
        if dist is None:
            dist = witnesses.get((state, action, self.k_max))
        return dist


def component_resolvers(
    compiled: CompiledImdp,
    components: List[PolicyStrategy],
    nature: NaturePolicy,
    k_max: int,
) -> List[NatureResolver]:
    """One resolver per strategy component.

    An adversarial nature without explicit witnesses replays each counting component's own
    recorded natures.
    """
    resolvers = []
    for component in components:
        policy = nature
        if (
            nature.mode is NatureMode.ADVERSARIAL
            and not nature.witnesses
            and isinstance(component, CountingStrategy)
        ):
            policy = adversarial_policy(component)
        tail = component.k_max if isinstance(component, CountingStrategy) else k_max
        resolvers.append(NatureResolver(compiled, policy, tail))
    return resolvers


def successor_flow(compiled: CompiledImdp, flow: np.ndarray, witnesses: np.ndarray) -> np.ndarray:
    """Probability mass arriving in every state when `flow` leaves through each row."""
    mass = flow[:, None] * witnesses
    return np.bincount(
        compiled.targets[compiled.mask],
        weights=mass[compiled.mask],
        minlength=compiled.n_states,
    )
