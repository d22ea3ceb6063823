from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from app.errors import ModelFormatError
from app.models.imdp_models import Imdp


@dataclass(frozen=True)
class CompiledImdp:
    """Dense numpy view of an Imdp.

    Rows are laid out state by state (in model order) and, within a state, in enabled-action
    order. Row entries are padded to the widest row; padding has zero bounds and is masked out.
    """

    state_ids: List[str]
    initial: int
    row_state: np.ndarray
    row_action: List[str]
    row_ptr: np.ndarray
    targets: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    mask: np.ndarray
    rewards: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def n_states(self) -> int:
        return len(self.state_ids)

    @property
    def n_rows(self) -> int:
        return len(self.row_action)

    def reward_vector(self, structure: str) -> np.ndarray:
        vector = self.rewards.get(structure)
        if vector is None:
            return np.zeros(self.n_rows)
        return vector

    def state_rows(self, state: int) -> range:
        return range(int(self.row_ptr[state]), int(self.row_ptr[state + 1]))

    def row_of(self, state: int, action: str) -> int:
        for row in self.state_rows(state):
            if self.row_action[row] == action:
                return row
        raise KeyError((self.state_ids[state], action))


def compile_model(model: Imdp) -> CompiledImdp:
    """Compile (and cache on the model) the dense numeric representation."""
    if model._compiled is not None:
        return model._compiled

    index = model.state_index()
    row_state: List[int] = []
    row_action: List[str] = []
    row_ptr = [0]
    widths = []
    for state in model.states:
        enabled = model.enabled.get(state, [])
        if not enabled:
            raise ModelFormatError(f"state {state!r} has no enabled actions")
        for action in enabled:
            row_state.append(index[state])
            row_action.append(action)
            widths.append(len(model.transitions[(state, action)].entries))
        row_ptr.append(len(row_action))

    n_rows, width = len(row_action), max(widths)
    targets = np.zeros((n_rows, width), dtype=np.int64)
    lower = np.zeros((n_rows, width))
    upper = np.zeros((n_rows, width))
    mask = np.zeros((n_rows, width), dtype=bool)
    for r, (state, action) in enumerate(zip(row_state, row_action, strict=True)):
        row = model.transitions[(model.states[state], action)]
        for k, entry in enumerate(row.entries):
            targets[r, k] = index[entry.target]
            lower[r, k] = entry.lower
            upper[r, k] = entry.upper
            mask[r, k] = True

    rewards = {}
    for name, values in model.rewards.items():
        vector = np.zeros(n_rows)
        for r, (state, action) in enumerate(zip(row_state, row_action, strict=True)):
            vector[r] = values.get((model.states[state], action), 0.0)
        rewards[name] = vector

    compiled = CompiledImdp(
        state_ids=list(model.states),
        initial=index[model.initial],
        row_state=np.asarray(row_state, dtype=np.int64),
        row_action=row_action,
        row_ptr=np.asarray(row_ptr, dtype=np.int64),
        targets=targets,
        lower=lower,
        upper=upper,
        mask=mask,
        rewards=rewards,
    )
    model._compiled = compiled
    return compiled


def group_argmax(q: np.ndarray, row_ptr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-state maximum over contiguous row groups and the first row attaining it."""
    starts = row_ptr[:-1]
    best = np.maximum.reduceat(q, starts)
    counts = np.diff(row_ptr)
    positions = np.arange(len(q))
    candidates = np.where(q >= np.repeat(best, counts), positions, len(q))
    return best, np.minimum.reduceat(candidates, starts)
