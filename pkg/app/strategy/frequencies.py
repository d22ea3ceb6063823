from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config import FREQUENCY_MAX_STEPS, FREQUENCY_TOLERANCE, UNROLL_STATE_LIMIT
from app.errors import FrequencyDivergenceError, InstanceTooLargeError
from app.imdp.compiled import compile_model
from app.imdp.model import terminal_states
from app.models.imdp_models import Imdp, IntervalRow
from app.models.strategy_models import (
    CountingStrategy,
    Frequencies,
    MixtureStrategy,
    NaturePolicy,
    RandomisedCountingStrategy,
)
from app.utils.logging import get_logger

from .policies import NatureResolver, PolicyStrategy, component_resolvers, row_policy, successor_flow

logger = get_logger("strategy", "frequencies")

AnyStrategy = Union[CountingStrategy, MixtureStrategy, RandomisedCountingStrategy]
LAYER_SEPARATOR = "@"


def mixture_components(strategy: AnyStrategy) -> Tuple[List[PolicyStrategy], List[float]]:
    if isinstance(strategy, MixtureStrategy):
        return list(strategy.components), list(strategy.probabilities)
    return [strategy], [1.0]


def _propagate(
    model: Imdp,
    strategy: PolicyStrategy,
    resolver: NatureResolver,
    k_max: int,
    tolerance: float,
    max_steps: int,
) -> Tuple[np.ndarray, List[float]]:
    """Row frequencies per bucket (shape (k_max+1, rows)) and the unabsorbed mass per step."""
    compiled = compile_model(model)
    terminal = np.zeros(compiled.n_states, dtype=bool)
    for state in terminal_states(model):
        terminal[model.index_of(state)] = True

    policies = [row_policy(compiled, strategy, b) for b in range(k_max + 1)]
    y = np.zeros((k_max + 1, compiled.n_rows))
    x = np.zeros(compiled.n_states)
    x[compiled.initial] = 1.0
    mass: List[float] = []

    for step in range(max_steps):
        bucket = min(step, k_max)
        if bucket == k_max:
            # terminal states only absorb once every exact step has been counted
            x[terminal] = 0.0
        total = float(x.sum())
        if bucket == k_max and total < tolerance:
            return y, mass
        mass.append(total)
        flow = x[compiled.row_state] * policies[bucket]
        y[bucket] += flow
        x = successor_flow(compiled, flow, resolver.witnesses(bucket))

    raise FrequencyDivergenceError(
        f"transient mass {float(x.sum()):.3g} left after {max_steps} steps; "
        "the strategy does not absorb under this nature"
    )


def state_action_frequencies(
    model: Imdp,
    strategy: AnyStrategy,
    nature: Optional[NaturePolicy] = None,
    tolerance: float = FREQUENCY_TOLERANCE,
    max_steps: int = FREQUENCY_MAX_STEPS,
    k_max: Optional[int] = None,
) -> Frequencies:
    """
    Expected number of times each (state, step bucket, action) is seen.

    Mass is pushed forward from the initial state under the strategy and a fixed memoryless
    nature. Buckets 0..k_max-1 count exact steps and bucket k_max accumulates every later step;
    terminal states absorb their mass in the last bucket. A mixture's frequencies are the
    probability-weighted average of its components'.

    Args:
        model (Imdp): The model the strategy was computed for.
        strategy (AnyStrategy): Counting, randomised or mixture strategy.
        nature (Optional[NaturePolicy]): Fixed nature; adversarial witnesses by default.
        tolerance (float): Remaining transient mass at which propagation stops.
        max_steps (int): Propagation cap.
        k_max (Optional[int]): Number of exact buckets, at least the strategy's own.

    Returns:
        Frequencies: Non-zero frequencies and the unabsorbed mass per step.

    Raises:
        FrequencyDivergenceError: If transient mass remains after `max_steps` steps.
    """
    nature = nature or NaturePolicy()
    components, probabilities = mixture_components(strategy)
    k_max = max([k_max or 0] + [c.k_max for c in components])
    compiled = compile_model(model)
    resolvers = component_resolvers(compiled, components, nature, k_max)

    y = np.zeros((k_max + 1, compiled.n_rows))
    mass: Dict[int, float] = defaultdict(float)
    for component, p, resolver in zip(components, probabilities, resolvers, strict=True):
        if p <= 0:
            continue
        component_y, component_mass = _propagate(model, component, resolver, k_max, tolerance, max_steps)
        y += p * component_y
        for step, m in enumerate(component_mass):
            mass[step] += p * m

    values = {}
    for bucket in range(k_max + 1):
        for r in np.flatnonzero(y[bucket]):
            state = compiled.state_ids[compiled.row_state[r]]
            values[(state, bucket, compiled.row_action[r])] = float(y[bucket, r])
    logger.debug("Computed state-action frequencies", pairs=len(values), steps=len(mass))
    return Frequencies(
        k_max=k_max,
        values=values,
        enabled={s: list(model.enabled[s]) for s in model.states},
        mass=[mass[step] for step in range(len(mass))],
    )


def randomise(frequencies: Frequencies) -> RandomisedCountingStrategy:
    """Normalize frequencies per (state, bucket); unvisited rows become uniform."""
    probs: Dict[int, Dict[str, Dict[str, float]]] = {}
    for bucket in range(frequencies.k_max + 1):
        rows = {}
        for state, actions in frequencies.enabled.items():
            counts = [frequencies.get(state, bucket, a) for a in actions]
            total = sum(counts)
            if total > 0:
                rows[state] = {a: c / total for a, c in zip(actions, counts, strict=True)}
            else:
                rows[state] = {a: 1.0 / len(actions) for a in actions}
        probs[bucket] = rows
    return RandomisedCountingStrategy(k_max=frequencies.k_max, probs=probs)


def naive_remix(mixture: MixtureStrategy) -> RandomisedCountingStrategy:
    """
    Mix the components' choices independently at every step.

    This does not preserve the mixture's value in general; it exists to compare against the
    frequency-based construction.
    """
    k_max = mixture.k_max
    states = mixture.components[0].tail.keys()
    probs: Dict[int, Dict[str, Dict[str, float]]] = {}
    for bucket in range(k_max + 1):
        rows: Dict[str, Dict[str, float]] = {}
        for state in states:
            dist: Dict[str, float] = defaultdict(float)
            for component, p in zip(mixture.components, mixture.probabilities, strict=True):
                dist[component.action(state, bucket)] += p
            rows[state] = dict(dist)
        probs[bucket] = rows
    return RandomisedCountingStrategy(k_max=k_max, probs=probs)


def expected_rewards(
    model: Imdp,
    strategy: AnyStrategy,
    structures: Sequence[str],
    bounds: Sequence[Optional[int]],
    nature: Optional[NaturePolicy] = None,
    tolerance: float = FREQUENCY_TOLERANCE,
) -> List[float]:
    """Exact expected total rewards under a fixed nature, read off the frequencies."""
    k_max = max([k for k in bounds if k is not None], default=0)
    frequencies = state_action_frequencies(model, strategy, nature, tolerance, k_max=k_max)
    totals = []
    for structure, bound in zip(structures, bounds, strict=True):
        totals.append(
            sum(
                y * model.reward(structure, state, action)
                for (state, bucket, action), y in frequencies.values.items()
                if bound is None or bucket < bound
            )
        )
    return totals


def layer_id(state: str, layer: int) -> str:
    return f"{state}{LAYER_SEPARATOR}{layer}"


def build_unrolled(
    model: Imdp,
    structures: Sequence[str],
    bounds: Sequence[Optional[int]],
) -> Tuple[Imdp, List[str]]:
    """
    Copy the model once per step 0..k_max so that step-bounded objectives become unbounded ones.

    Layer i < k_max moves to layer i+1; layer k_max keeps its own dynamics. A structure with bound
    k is renamed `name#k` and keeps its rewards only in layers below k; unbounded structures are
    copied into every layer.

    Returns:
        Tuple[Imdp, List[str]]: The layered model and the structure name of each objective in it.

    Raises:
        InstanceTooLargeError: If the layered model would exceed UNROLL_STATE_LIMIT states.
    """
    k_max = max([k for k in bounds if k is not None], default=0)
    if (k_max + 1) * len(model.states) > UNROLL_STATE_LIMIT:
        raise InstanceTooLargeError(
            f"unrolling {len(model.states)} states {k_max + 1} times exceeds {UNROLL_STATE_LIMIT}"
        )

    states, enabled, transitions = [], {}, {}
    for layer in range(k_max + 1):
        successor_layer = min(layer + 1, k_max)
        for state in model.states:
            sid = layer_id(state, layer)
            states.append(sid)
            enabled[sid] = list(model.enabled[state])
            for action in model.enabled[state]:
                row = model.row(state, action)
                transitions[(sid, action)] = IntervalRow.from_bounds(
                    {layer_id(t, successor_layer): bounds_ for t, bounds_ in row.bounds().items()}
                )

    names: List[str] = []
    rewards: Dict[str, Dict[Tuple[str, str], float]] = {}
    for structure, bound in zip(structures, bounds, strict=True):
        name = structure if bound is None else f"{structure}#{bound}"
        names.append(name)
        layers = range(k_max + 1) if bound is None else range(min(bound, k_max + 1))
        rewards[name] = {
            (layer_id(state, layer), action): value
            for (state, action), value in model.rewards.get(structure, {}).items()
            for layer in layers
        }

    unrolled = Imdp(
        states=states,
        initial=layer_id(model.initial, 0),
        actions=list(model.actions),
        enabled=enabled,
        transitions=transitions,
        rewards=rewards,
    )
    logger.debug("Built unrolled model", layers=k_max + 1, states=len(states))
    return unrolled, names


def layered_strategy(strategy: CountingStrategy, model: Imdp, k_max: int) -> CountingStrategy:
    """The memoryless strategy on the unrolled model that plays `strategy` layer by layer."""
    choice = {
        layer_id(state, layer): strategy.action(state, layer)
        for layer in range(k_max + 1)
        for state in model.states
    }
    return CountingStrategy.memoryless(choice)


def fold_layers(frequencies: Frequencies) -> Dict[Tuple[str, int, str], float]:
    """Map frequencies of an unrolled model back to (state, layer, action)."""
    folded = {}
    for (sid, _, action), y in frequencies.values.items():
        state, _, layer = sid.rpartition(LAYER_SEPARATOR)
        folded[(state, int(layer), action)] = y
    return folded
