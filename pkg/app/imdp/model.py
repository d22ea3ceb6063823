import math
from collections import deque
from typing import Dict, List, Set

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from app.models.imdp_models import Imdp, Sec, Violation
from app.utils.logging import get_logger

logger = get_logger("imdp", "model")

SUM_TOLERANCE = 1e-12


def validate(model: Imdp) -> List[Violation]:
    """
    Check every structural and probabilistic rule of an IMDP.

    Args:
        model (Imdp): The parsed model.

    Returns:
        List[Violation]: Empty iff the model is well formed. Each entry names the state, action
            and rule that failed.
    """
    violations: List[Violation] = []
    known_states = set(model.states)
    known_actions = set(model.actions)

    if len(known_states) != len(model.states):
        violations.append(Violation(rule="duplicate-state", message="state ids must be unique"))
    if model.initial not in known_states:
        violations.append(
            Violation(rule="unknown-initial", message="initial state is not a state", state=model.initial)
        )
    for state in model.enabled:
        if state not in known_states:
            violations.append(
                Violation(rule="unknown-state", message="actions given for unknown state", state=state)
            )

    for state in model.states:
        enabled = model.enabled.get(state, [])
        if not enabled:
            violations.append(
                Violation(rule="no-actions", message="state has no enabled actions", state=state)
            )
        if len(set(enabled)) != len(enabled):
            violations.append(
                Violation(rule="duplicate-action", message="action enabled twice", state=state)
            )
        for action in enabled:
            if action not in known_actions:
                violations.append(
                    Violation(
                        rule="unknown-action",
                        message="enabled action missing from the action list",
                        state=state,
                        action=action,
                    )
                )
            row = model.transitions.get((state, action))
            if row is None:
                violations.append(
                    Violation(
                        rule="missing-row",
                        message="enabled action has no transitions",
                        state=state,
                        action=action,
                    )
                )
                continue
            violations.extend(_row_violations(state, action, row, known_states))

    for (state, action) in model.transitions:
        if action not in model.enabled.get(state, []):
            violations.append(
                Violation(
                    rule="disabled-row",
                    message="transitions given for a disabled action",
                    state=state,
                    action=action,
                )
            )
    for name, values in model.rewards.items():
        for (state, action), value in values.items():
            if action not in model.enabled.get(state, []):
                violations.append(
                    Violation(
                        rule="disabled-reward",
                        message=f"reward structure {name!r} defined on a disabled pair",
                        state=state,
                        action=action,
                    )
                )
            if not math.isfinite(value):
                violations.append(
                    Violation(
                        rule="non-finite-reward",
                        message=f"reward structure {name!r} has a non-finite value",
                        state=state,
                        action=action,
                    )
                )
    return violations


def _row_violations(state: str, action: str, row, known_states: Set[str]) -> List[Violation]:
    found: List[Violation] = []

    def add(rule: str, message: str) -> None:
        found.append(Violation(rule=rule, message=message, state=state, action=action))

    if not row.entries:
        add("empty-row", "row lists no successors")
        return found
    targets = row.targets
    if len(set(targets)) != len(targets):
        add("duplicate-target", "successor listed more than once")
    for entry in row.entries:
        if entry.target not in known_states:
            add("unknown-target", f"successor {entry.target!r} is not a state")
        if not entry.lower > 0:
            add("lower-bound", "lower bound must be > 0")
        if entry.upper > 1:
            add("upper-bound", "upper bound must be <= 1")
        if entry.lower > entry.upper:
            add("empty-interval", "lower bound exceeds upper bound")
    if math.fsum(e.lower for e in row.entries) > 1 + SUM_TOLERANCE:
        add("lower-sum", "lower bounds exceed 1")
    if math.fsum(e.upper for e in row.entries) < 1 - SUM_TOLERANCE:
        add("upper-sum", "upper bounds below 1")
    return found


def reachable_states(model: Imdp, source: str) -> Set[str]:
    """States reachable from `source` through listed (positive upper bound) transitions."""
    model.index_of(source)
    seen = {source}
    queue = deque([source])
    while queue:
        state = queue.popleft()
        for action in model.enabled.get(state, []):
            for target in model.transitions[(state, action)].targets:
                if target not in seen:
                    seen.add(target)
                    queue.append(target)
    return seen


def strong_end_components(model: Imdp) -> List[Sec]:
    """
    Maximal strong end-components of the underlying graph.

    Lower bounds are positive wherever upper bounds are, so the support of every feasible
    distribution equals the listed successors and the classic maximal end-component
    decomposition applies unchanged.
    """
    index = model.state_index()
    n = len(model.states)
    alive: Dict[str, List[str]] = {s: list(model.enabled.get(s, [])) for s in model.states}

    while True:
        sources, sinks = [], []
        for state, actions in alive.items():
            for action in actions:
                for target in model.transitions[(state, action)].targets:
                    sources.append(index[state])
                    sinks.append(index[target])
        graph = csr_matrix((np.ones(len(sources)), (sources, sinks)), shape=(n, n))
        _, labels = connected_components(graph, directed=True, connection="strong")

        changed = False
        for state in list(alive):
            label = labels[index[state]]
            kept = [
                action
                for action in alive[state]
                if all(
                    target in alive and labels[index[target]] == label
                    for target in model.transitions[(state, action)].targets
                )
            ]
            if len(kept) != len(alive[state]):
                changed = True
            if kept:
                alive[state] = kept
            else:
                del alive[state]
                changed = True
        if not changed:
            break

    components: Dict[int, List[str]] = {}
    for state in model.states:
        if state in alive:
            components.setdefault(int(labels[index[state]]), []).append(state)
    secs = [
        Sec(states=members, actions={s: alive[s] for s in members})
        for members in sorted(components.values(), key=lambda m: index[m[0]])
    ]
    logger.debug("Computed strong end-components", count=len(secs))
    return secs


def terminal_states(model: Imdp) -> Set[str]:
    """States whose every action is a certain self-loop with zero reward in every structure."""
    terminal = set()
    for state in model.states:
        enabled = model.enabled.get(state, [])
        if enabled and all(_is_silent_self_loop(model, state, action) for action in enabled):
            terminal.add(state)
    return terminal


def _is_silent_self_loop(model: Imdp, state: str, action: str) -> bool:
    entries = model.transitions[(state, action)].entries
    if len(entries) != 1 or entries[0].target != state or entries[0].lower < 1:
        return False
    return all(model.reward(name, state, action) == 0 for name in model.rewards)
