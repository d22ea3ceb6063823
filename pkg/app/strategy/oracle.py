import itertools
import math
from typing import Dict, Iterator, List, Sequence

import numpy as np

from app.config import BRUTE_FORCE_STRATEGY_LIMIT
from app.errors import ConvergenceError, InstanceTooLargeError
from app.imdp.robust import vertex_enumerate
from app.models.geometry_models import PointSet
from app.models.imdp_models import Imdp
from app.models.query_models import BasicQuery
from app.models.strategy_models import CountingStrategy
from app.utils.logging import get_logger

from .frequencies import LAYER_SEPARATOR, build_unrolled

logger = get_logger("strategy", "oracle")

ORACLE_TOLERANCE = 1e-13
ORACLE_MAX_SWEEPS = 10**5


class _VertexModel:
    """Padded vertex matrices and reward vectors of every row of a small model.

    Rows are padded to a common number of targets (probability 0) and vertices (copies of the
    first vertex), so one evaluation sweep is a single array operation.
    """

    def __init__(self, model: Imdp, structures: Sequence[str]) -> None:
        self.model = model
        self.index = model.state_index()
        self.n = len(model.states)
        self.initial = self.index[model.initial]
        rows = list(model.rows())
        vertex_lists = [vertex_enumerate(row) for _, _, row in rows]
        width = max(len(row.targets) for _, _, row in rows)
        depth = max(len(v) for v in vertex_lists)

        self.targets: Dict[tuple, np.ndarray] = {}
        self.vertices: Dict[tuple, np.ndarray] = {}
        self.rewards: Dict[tuple, np.ndarray] = {}
        for (state, action, row), vertices in zip(rows, vertex_lists, strict=True):
            s = self.index[state]
            targets = np.zeros(width, dtype=np.int64)
            targets[: len(row.targets)] = [self.index[t] for t in row.targets]
            matrix = np.zeros((depth, width))
            for i in range(depth):
                vertex = vertices[min(i, len(vertices) - 1)]
                matrix[i, : len(row.targets)] = [vertex.probs[t] for t in row.targets]
            self.targets[(s, action)] = targets
            self.vertices[(s, action)] = matrix
            self.rewards[(s, action)] = np.array(
                [model.reward(name, state, action) for name in structures]
            )

    def actions(self, s: int) -> List[str]:
        return self.model.enabled[self.model.states[s]]

    def reachable(self) -> List[int]:
        """States reachable from the initial state under some strategy."""
        seen = {self.initial}
        frontier = [self.initial]
        while frontier:
            s = frontier.pop()
            for a in self.actions(s):
                row = self.model.row(self.model.states[s], a)
                for t in row.targets:
                    if self.index[t] not in seen:
                        seen.add(self.index[t])
                        frontier.append(self.index[t])
        return sorted(seen)

    def robust_value(self, choice: Dict[int, str], w: np.ndarray) -> float:
        """Weighted total reward of a memoryless choice against the nature minimizing it."""
        acts = [(s, choice.get(s, self.actions(s)[0])) for s in range(self.n)]
        rewards = np.array([w @ self.rewards[key] for key in acts])
        targets = np.stack([self.targets[key] for key in acts])
        vertices = np.stack([self.vertices[key] for key in acts])
        x = np.zeros(self.n)
        for _ in range(ORACLE_MAX_SWEEPS):
            y = rewards + np.einsum("svt,st->sv", vertices, x[targets]).min(axis=1)
            if np.max(np.abs(y - x)) < ORACLE_TOLERANCE:
                return float(y[self.initial])
            x = y
        raise ConvergenceError("oracle evaluation did not converge")


def _unrolled(basic: BasicQuery) -> _VertexModel:
    unrolled, names = build_unrolled(basic.model, basic.structures, basic.bounds)
    return _VertexModel(unrolled, names)


def _choices(vm: _VertexModel, limit: int) -> Iterator[Dict[int, str]]:
    slots = vm.reachable()
    options = [vm.actions(s) for s in slots]
    count = math.prod(len(o) for o in options)
    if count > limit:
        raise InstanceTooLargeError(f"{count} strategies exceed the enumeration limit {limit}")
    logger.debug("Enumerating strategies", strategies=count)
    for picks in itertools.product(*options):
        yield dict(zip(slots, picks, strict=True))


def _as_strategy(vm: _VertexModel, choice: Dict[int, str], k_max: int) -> CountingStrategy:
    layers: Dict[int, Dict[str, str]] = {layer: {} for layer in range(k_max + 1)}
    for s, sid in enumerate(vm.model.states):
        state, _, layer = sid.rpartition(LAYER_SEPARATOR)
        layers[int(layer)][state] = choice.get(s, vm.actions(s)[0])
    return CountingStrategy(
        per_step={j: layers[j - 1] for j in range(1, k_max + 1)}, tail=layers[k_max]
    )


def brute_force_achievable(
    basic: BasicQuery, limit: int = BRUTE_FORCE_STRATEGY_LIMIT
) -> PointSet:
    """
    Non-dominated worst-case value vectors of the deterministic counting strategies.

    Counting strategies are the memoryless strategies of the model unrolled once per step, so
    these are enumerated on the unrolled model, restricted to states some strategy can reach.
    Each objective is evaluated against its own worst nature, found among the vertices of every
    row. A threshold vector is achievable exactly when it lies in the downward closure of the
    returned points.

    Raises:
        InstanceTooLargeError: If more than `limit` strategies would be enumerated.
    """
    vm = _unrolled(basic)
    units = np.eye(basic.n_objectives)
    found: Dict[tuple, tuple] = {}
    for choice in _choices(vm, limit):
        vector = [vm.robust_value(choice, unit) for unit in units]
        found.setdefault(tuple(round(v, 12) for v in vector), (vector, choice))
    entries = list(found.values())
    values = np.array([vector for vector, _ in entries])
    above = values[None, :, :]
    below = values[:, None, :]
    dominated = ((above >= below).all(axis=2) & (above > below).any(axis=2)).any(axis=1)
    points = PointSet()
    for (vector, choice), drop in zip(entries, dominated, strict=True):
        if not drop:
            points.add(vector, _as_strategy(vm, choice, basic.k_max))
    logger.debug("Enumerated strategy values", distinct=len(entries), kept=len(points))
    return points


def brute_force_weighted_value(
    basic: BasicQuery, w: Sequence[float], limit: int = BRUTE_FORCE_STRATEGY_LIMIT
) -> float:
    """max over deterministic counting strategies of the weighted value against the worst nature."""
    vm = _unrolled(basic)
    w = np.asarray(w, dtype=float)
    return max(vm.robust_value(choice, w) for choice in _choices(vm, limit))
