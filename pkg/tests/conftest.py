from typing import Callable

import numpy as np
import pytest

from app.constants import ObjectiveKind, QueryMode, Relation
from app.models.imdp_models import Imdp, IntervalRow
from app.models.query_models import BasicQuery, Objective, Query
from app.models.strategy_models import CountingStrategy, MixtureStrategy
from app.query import to_basic_form


def running_imdp(extra_rewards: dict | None = None) -> Imdp:
    rewards = {("s", "a"): 3.0, ("s", "b"): 1.0}
    rewards.update(extra_rewards or {})
    return Imdp(
        states=["s", "t", "u"],
        initial="s",
        actions=["a", "b"],
        enabled={"s": ["a", "b"], "t": ["a"], "u": ["b"]},
        transitions={
            ("s", "a"): IntervalRow.from_bounds({"t": (1 / 3, 2 / 3), "u": (1 / 10, 1.0)}),
            ("s", "b"): IntervalRow.from_bounds({"t": (2 / 5, 3 / 5), "u": (1 / 4, 2 / 3)}),
            ("t", "a"): IntervalRow.from_bounds({"t": (1.0, 1.0)}),
            ("u", "b"): IntervalRow.from_bounds({"u": (1.0, 1.0)}),
        },
        rewards={"r": rewards},
    )


def running_objectives(reach: float | str = "1/3", reward: float | str = "1/4") -> list:
    return [
        Objective(kind=ObjectiveKind.REACH, target=["t"], op=Relation.GE, threshold=reach, step_bound=1),
        Objective(kind=ObjectiveKind.REWARD, structure="r", op=Relation.GE, threshold=reward, step_bound=1),
    ]


@pytest.fixture()
def running_model() -> Imdp:
    return running_imdp()


@pytest.fixture()
def running_query() -> Query:
    return Query(mode=QueryMode.SYNTH, objectives=running_objectives())


@pytest.fixture()
def running_basic(running_model, running_query) -> BasicQuery:
    return to_basic_form(running_model, running_query)


@pytest.fixture()
def always() -> Callable[[BasicQuery, str], CountingStrategy]:
    """Counting strategy playing `action` at the initial state and the only action elsewhere."""

    def build(basic: BasicQuery, action: str) -> CountingStrategy:
        model = basic.model
        choice = {s: model.enabled[s][0] for s in model.states}
        choice[model.initial] = action
        return CountingStrategy.memoryless(choice, k_max=basic.k_max)

    return build


@pytest.fixture()
def chain_model() -> Imdp:
    """s -a-> t (reward 1), s -b-> u; u -a-> v, u -b-> w (reward 1); t, v, w absorb."""
    certain = {}
    enabled = {"s": ["a", "b"], "u": ["a", "b"]}
    for state, action, target in (("s", "a", "t"), ("s", "b", "u"), ("u", "a", "v"), ("u", "b", "w")):
        certain[(state, action)] = IntervalRow.from_bounds({target: (1.0, 1.0)})
    for state in ("t", "v", "w"):
        enabled[state] = ["a", "b"]
        for action in ("a", "b"):
            certain[(state, action)] = IntervalRow.from_bounds({state: (1.0, 1.0)})
    return Imdp(
        states=["s", "t", "u", "v", "w"],
        initial="s",
        actions=["a", "b"],
        enabled=enabled,
        transitions=certain,
        rewards={"r": {("s", "a"): 1.0, ("u", "b"): 1.0}},
    )


@pytest.fixture()
def chain_mixture(chain_model) -> MixtureStrategy:
    first = CountingStrategy.memoryless({s: "a" for s in chain_model.states})
    second = CountingStrategy.memoryless({s: "b" for s in chain_model.states})
    return MixtureStrategy(components=[first, second], probabilities=[0.5, 0.5])


def random_imdp(
    seed: int, n_states: int = 3, n_actions: int = 2, spread: float = 0.2, absorbing: bool = False
) -> Imdp:
    """Random IMDP with integer rewards r1, r2 in 0..3.

    Every row has two random successors with intervals of half-width `spread` around a random
    distribution (point intervals for spread 0). With `absorbing`, every row also moves to a
    silent `sink` with probability at least 0.15, so total rewards stay finite.
    """
    rng = np.random.default_rng(seed)
    states = [f"x{i}" for i in range(n_states)]
    actions = [f"m{j}" for j in range(n_actions)]
    transitions = {}
    rewards = {"r1": {}, "r2": {}}
    for state in states:
        for action in actions:
            targets = [str(t) for t in rng.choice(states, size=2, replace=False)]
            nominal = list(rng.dirichlet(np.ones(2)))
            if absorbing:
                stop = float(rng.uniform(0.3, 0.6))
                nominal = [(1 - stop) * p for p in nominal] + [stop]
                targets.append("sink")
            nominal[-1] = 1.0 - sum(nominal[:-1])
            transitions[(state, action)] = IntervalRow.from_bounds(
                {t: (max(p - spread, p / 2), min(1.0, p + spread)) for t, p in zip(targets, nominal, strict=True)}
            )
            rewards["r1"][(state, action)] = float(rng.integers(0, 4))
            rewards["r2"][(state, action)] = float(rng.integers(0, 4))
    enabled = {s: list(actions) for s in states}
    if absorbing:
        states.append("sink")
        enabled["sink"] = [actions[0]]
        transitions[("sink", actions[0])] = IntervalRow.from_bounds({"sink": (1.0, 1.0)})
    return Imdp(
        states=states,
        initial=states[0],
        actions=actions,
        enabled=enabled,
        transitions=transitions,
        rewards=rewards,
    )


@pytest.fixture()
def random_model() -> Callable[..., Imdp]:
    return random_imdp


@pytest.fixture()
def random_basic() -> Callable[..., BasicQuery]:
    """Random two-objective basic queries; see random_imdp for the model options."""

    def build(seed: int, bounds: tuple = (2, 3), **options) -> BasicQuery:
        model = random_imdp(seed, **options)
        return BasicQuery(model=model, structures=["r1", "r2"], bounds=list(bounds), thresholds=[0.0, 0.0])

    return build


@pytest.fixture()
def running_variant() -> Callable[..., Imdp]:
    return running_imdp


@pytest.fixture()
def objectives() -> Callable[..., list]:
    return running_objectives


@pytest.fixture()
def near_tie_basic() -> BasicQuery:
    """s -a-> t pays (1, 0), s -b-> t pays (0.99995, 10); both objectives unbounded."""
    model = Imdp(
        states=["s", "t"],
        initial="s",
        actions=["a", "b"],
        enabled={"s": ["a", "b"], "t": ["a"]},
        transitions={
            ("s", "a"): IntervalRow.from_bounds({"t": (1.0, 1.0)}),
            ("s", "b"): IntervalRow.from_bounds({"t": (1.0, 1.0)}),
            ("t", "a"): IntervalRow.from_bounds({"t": (1.0, 1.0)}),
        },
        rewards={"r1": {("s", "a"): 1.0, ("s", "b"): 0.99995}, "r2": {("s", "b"): 10.0}},
    )
    return BasicQuery(model=model, structures=["r1", "r2"], bounds=[None, None], thresholds=[1.0, 0.0])
