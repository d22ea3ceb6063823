from collections import deque
from typing import Dict, List, Set, Tuple

from app.constants import NEGATION_PREFIX, REACH_PREFIX, Direction, ObjectiveKind, QueryMode, Relation
from app.errors import AssumptionError, UnsatisfiableQueryError
from app.imdp.model import reachable_states, strong_end_components
from app.models.imdp_models import Imdp, IntervalEntry, IntervalRow, Violation
from app.models.query_models import BasicQuery, Objective, Query
from app.utils.logging import get_logger

logger = get_logger("query", "transform")

DIVERGENT_RULE = "divergent-reward"


def _product_id(state: str, reached: Tuple[int, ...], plain: bool) -> str:
    if plain:
        return state
    return f"{state}|{','.join(str(i + 1) for i in reached)}"


def to_basic_form(model: Imdp, query: Query) -> BasicQuery:
    """
    Reduce a query to lower-bounded expected total reward predicates.

    Reachability objectives are tracked by the set of targets already visited; the first visit
    of target set i pays a reward of +1 (or -1 for upper-bounded objectives) on the action taken
    there, and the step bound grows by one to cover that action. Upper-bounded reward
    objectives are negated. Only the part reachable from (initial, {}) is built.

    Args:
        model (Imdp): Source model.
        query (Query): Objectives to reduce; ops must already be fixed.

    Returns:
        BasicQuery: Product model, structures, bounds, thresholds and the state back map.
    """
    reach_ids = [i for i, o in enumerate(query.objectives) if o.kind is ObjectiveKind.REACH]
    targets = {i: set(query.objectives[i].target) for i in reach_ids}
    plain = not reach_ids

    structures, bounds, thresholds, signs = [], [], [], []
    for i, objective in enumerate(query.objectives):
        sign = 1 if objective.op is Relation.GE else -1
        prefix = "" if sign > 0 else NEGATION_PREFIX
        if objective.kind is ObjectiveKind.REACH:
            structures.append(f"{prefix}{REACH_PREFIX}{i + 1}")
            bounds.append(None if objective.step_bound is None else objective.step_bound + 1)
        else:
            structures.append(f"{prefix}{objective.structure}")
            bounds.append(objective.step_bound)
        thresholds.append(sign * objective.threshold)
        signs.append(sign)

    start = (model.initial, ())
    seen = {start}
    order: List[Tuple[str, Tuple[int, ...]]] = []
    queue = deque([start])
    enabled: Dict[str, List[str]] = {}
    transitions: Dict[Tuple[str, str], IntervalRow] = {}
    rewards: Dict[str, Dict[Tuple[str, str], float]] = {name: {} for name in structures}

    while queue:
        state, reached = queue.popleft()
        order.append((state, reached))
        node = _product_id(state, reached, plain)
        newly = tuple(i for i in reach_ids if state in targets[i] and i not in reached)
        successor_reached = tuple(sorted(reached + newly))
        enabled[node] = list(model.enabled.get(state, []))

        for action in enabled[node]:
            row = model.transitions[(state, action)]
            entries = []
            for entry in row.entries:
                successor = (entry.target, successor_reached)
                if successor not in seen:
                    seen.add(successor)
                    queue.append(successor)
                entries.append(
                    IntervalEntry(
                        target=_product_id(entry.target, successor_reached, plain),
                        lower=entry.lower,
                        upper=entry.upper,
                    )
                )
            transitions[(node, action)] = IntervalRow(entries=entries)

            for i, objective in enumerate(query.objectives):
                if objective.kind is ObjectiveKind.REACH:
                    value = 1.0 if i in newly else 0.0
                else:
                    value = model.reward(objective.structure, state, action)
                if value:
                    rewards[structures[i]][(node, action)] = signs[i] * value

    order.sort(key=lambda item: (model.index_of(item[0]), item[1]))
    states = [_product_id(s, v, plain) for s, v in order]
    product = Imdp(
        states=states,
        initial=_product_id(model.initial, (), plain),
        actions=list(model.actions),
        enabled=enabled,
        transitions=transitions,
        rewards=rewards,
    )
    logger.debug(
        "Built basic form",
        states=len(states),
        source_states=len(model.states),
        objectives=len(structures),
    )
    return BasicQuery(
        model=product,
        structures=structures,
        bounds=bounds,
        thresholds=thresholds,
        signs=signs,
        labels=[o.label for o in query.objectives],
        back_map={_product_id(s, v, plain): (s, tuple(i + 1 for i in v)) for s, v in order},
    )


def _maximizing_unbounded(query: Query) -> List[Objective]:
    return [
        o
        for o in query.objectives
        if o.kind is ObjectiveKind.REWARD and o.step_bound is None and o.op is Relation.GE
    ]


def _divergent_pairs(model: Imdp, query: Query) -> List[Violation]:
    maximizing = _maximizing_unbounded(query)
    if not maximizing:
        return []
    reachable = reachable_states(model, model.initial)
    found = []
    for sec in strong_end_components(model):
        if not reachable.intersection(sec.states):
            continue
        members = ",".join(sec.states)
        for state in sec.states:
            for action in sec.actions[state]:
                if any(model.reward(o.structure, state, action) > 0 for o in maximizing):
                    found.append(
                        Violation(
                            rule=DIVERGENT_RULE,
                            message=f"positive reward inside SEC ({{{members}}},{action})",
                            state=state,
                            action=action,
                        )
                    )
    return found


def check_assumptions(model: Imdp, query: Query) -> List[Violation]:
    """Check the query against the model; an empty list means every assumption holds."""
    violations: List[Violation] = []
    known = set(model.states)
    for objective in query.objectives:
        if objective.kind is ObjectiveKind.REACH:
            for state in objective.target:
                if state not in known:
                    violations.append(
                        Violation(rule="unknown-target", message="target is not a state", state=state)
                    )
            continue
        if objective.structure not in model.rewards:
            violations.append(
                Violation(
                    rule="unknown-structure",
                    message=f"reward structure {objective.structure!r} does not exist",
                )
            )
            continue
        for (state, action), value in model.rewards[objective.structure].items():
            if value < 0:
                violations.append(
                    Violation(
                        rule="negative-reward",
                        message=f"reward structure {objective.structure!r} is negative",
                        state=state,
                        action=action,
                    )
                )

    unbounded_ops = {
        o.op for o in query.objectives if o.kind is ObjectiveKind.REWARD and o.step_bound is None
    }
    if len(unbounded_ops) > 1:
        violations.append(
            Violation(rule="mixed-directions", message="mixed infinite-horizon directions")
        )

    if not violations:
        violations.extend(_divergent_pairs(model, query))
    return violations


def prune_reward_divergent(model: Imdp, query: Query) -> Imdp:
    """
    Remove actions that can collect a maximized reward forever.

    SEC-internal actions with positive reward under a maximizing unbounded structure are
    removed; then states left without actions and actions that may lead into removed states are
    removed until nothing changes.

    Raises:
        UnsatisfiableQueryError: If the initial state gets removed.
    """
    offending = {(v.state, v.action) for v in _divergent_pairs(model, query)}
    if not offending:
        return model

    enabled = {
        s: [a for a in model.enabled.get(s, []) if (s, a) not in offending] for s in model.states
    }
    removed: Set[str] = set()
    while True:
        empty = {s for s, actions in enabled.items() if not actions} - removed
        if not empty:
            break
        removed |= empty
        for state in enabled:
            enabled[state] = [
                a
                for a in enabled[state]
                if not removed.intersection(model.transitions[(state, a)].targets)
            ]
    if model.initial in removed:
        raise UnsatisfiableQueryError(
            "every strategy from the initial state collects unbounded reward"
        )

    states = [s for s in model.states if s not in removed]
    kept = {(s, a) for s in states for a in enabled[s]}
    logger.warning(
        "Pruned reward-divergent behaviour",
        removed_actions=len(offending),
        removed_states=len(removed),
    )
    return Imdp(
        states=states,
        initial=model.initial,
        actions=list(model.actions),
        enabled={s: enabled[s] for s in states},
        transitions={key: row for key, row in model.transitions.items() if key in kept},
        rewards={
            name: {key: v for key, v in values.items() if key in kept}
            for name, values in model.rewards.items()
        },
    )


def effective_query(query: Query) -> Query:
    """Fix the relational operators implied by the query mode.

    The optimized objective of a quantitative query and both objectives of a Pareto query get
    >= for maximization and <= for minimization, with a zero threshold.
    """
    objectives = list(query.objectives)

    def directed(objective: Objective, direction: Direction) -> Objective:
        op = Relation.GE if direction is Direction.MAX else Relation.LE
        return objective.model_copy(update={"op": op, "threshold": 0.0})

    if query.mode is QueryMode.QNT:
        objectives[query.qnt_index] = directed(objectives[query.qnt_index], query.direction)
    elif query.mode is QueryMode.PARETO:
        directions = query.directions or [Direction.MAX] * len(objectives)
        objectives = [directed(o, d) for o, d in zip(objectives, directions, strict=True)]
    return query.model_copy(update={"objectives": objectives})


def prepare_query(model: Imdp, query: Query) -> BasicQuery:
    """Check assumptions, prune divergent rewards if needed and reduce to basic form.

    Raises:
        AssumptionError: On unknown names, negative rewards or mixed unbounded directions.
        UnsatisfiableQueryError: If pruning removes the initial state.
    """
    query = effective_query(query)
    violations = check_assumptions(model, query)
    hard = [v for v in violations if v.rule != DIVERGENT_RULE]
    if hard:
        raise AssumptionError("; ".join(v.message for v in hard), hard)
    if violations:
        model = prune_reward_divergent(model, query)
    return to_basic_form(model, query)
