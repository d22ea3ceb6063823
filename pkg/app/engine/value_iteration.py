from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix

from app.config import EPSILON, LEXICOGRAPHIC_TOLERANCE, VI_MAX_ITERATIONS, VI_RELATIVE_RESIDUAL
from app.constants import Direction
from app.errors import ConvergenceError, DimensionMismatchError
from app.imdp.compiled import CompiledImdp, compile_model, group_argmax
from app.imdp.robust import robust_extremum_rows
from app.models.query_models import BasicQuery
from app.models.result_models import ValueState, VIResult
from app.models.strategy_models import CountingStrategy
from app.utils.logging import get_logger

logger = get_logger("engine", "value_iteration")


class _Sweeper:
    """One Bellman sweep, either optimizing over actions or following fixed rows."""

    def __init__(self, compiled: CompiledImdp, nature: Direction, relative: bool) -> None:
        self.compiled = compiled
        self.nature = nature
        self.relative = relative

    def sweep(
        self,
        x: np.ndarray,
        rewards: np.ndarray,
        fixed_rows: Optional[np.ndarray] = None,
        allowed: Optional[np.ndarray] = None,
        tie_values: Optional[np.ndarray] = None,
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Returns new values, chosen rows, their witnesses and the witnesses of all rows."""
        if fixed_rows is not None:
            values, probs = robust_extremum_rows(
                self.compiled, x, self.nature, rows=fixed_rows, tie_values=tie_values
            )
            return rewards[fixed_rows] + values, fixed_rows, probs, probs
        values, probs = robust_extremum_rows(self.compiled, x, self.nature, tie_values=tie_values)
        q = rewards + values
        if allowed is not None:
            q = np.where(allowed, q, -np.inf)
        y, best = group_argmax(q, self.compiled.row_ptr)
        return y, best, probs[best], probs

    def residual(self, y: np.ndarray, x: np.ndarray) -> float:
        if y.size == 0:
            return 0.0
        delta = float(np.max(np.abs(y - x)))
        if self.relative:
            delta /= max(1.0, float(np.max(np.abs(y))))
        return delta

    def converge(
        self,
        rewards: np.ndarray,
        epsilon: float,
        max_iterations: int,
        fixed_rows: Optional[np.ndarray] = None,
        allowed: Optional[np.ndarray] = None,
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
        x = np.zeros(self.compiled.n_states)
        for iteration in range(1, max_iterations + 1):
            y, best, chosen, every = self.sweep(x, rewards, fixed_rows, allowed)
            delta = self.residual(y, x)
            x = y
            if delta <= epsilon:
                return x, best, chosen, every, iteration
        logger.error("Value iteration did not converge", iterations=max_iterations, residual=delta)
        raise ConvergenceError(
            f"value iteration did not converge within {max_iterations} iterations "
            f"(residual {delta:.3g}); rewards may diverge"
        )

    def evaluate(
        self,
        rows: np.ndarray,
        probs: np.ndarray,
        rewards: np.ndarray,
        epsilon: float,
        max_iterations: int,
    ) -> np.ndarray:
        """Policy evaluation of several reward vectors (one per column) under fixed rows/natures."""
        compiled = self.compiled
        n = compiled.n_states
        mask = compiled.mask[rows]
        sources = np.repeat(np.arange(n), mask.sum(axis=1))
        transition = csr_matrix(
            (probs[mask], (sources, compiled.targets[rows][mask])), shape=(n, n)
        )
        per_state = rewards[:, rows].T
        x = np.zeros_like(per_state)
        for _ in range(max_iterations):
            y = per_state + transition @ x
            delta = self.residual(y, x)
            x = y
            if delta <= epsilon:
                return x
        raise ConvergenceError(
            f"policy evaluation did not converge within {max_iterations} iterations"
        )


def _reward_matrix(compiled: CompiledImdp, basic: BasicQuery) -> np.ndarray:
    return np.vstack([compiled.reward_vector(name) for name in basic.structures])


def _distributions(compiled: CompiledImdp, rows: np.ndarray, probs: np.ndarray) -> Dict[str, Dict[str, float]]:
    natures = {}
    for state, (row, witness) in enumerate(zip(rows, probs, strict=True)):
        mask = compiled.mask[row]
        natures[compiled.state_ids[state]] = {
            compiled.state_ids[t]: float(p)
            for t, p in zip(compiled.targets[row][mask], witness[mask], strict=True)
        }
    return natures


def _choice(compiled: CompiledImdp, rows: np.ndarray) -> Dict[str, str]:
    return {compiled.state_ids[s]: compiled.row_action[r] for s, r in enumerate(rows)}


def _run_phases(
    basic: BasicQuery,
    w: np.ndarray,
    epsilon: float,
    max_iterations: int,
    nature: Direction,
    relative: bool,
    fixed: Optional[CountingStrategy] = None,
) -> Tuple[CountingStrategy, np.ndarray, np.ndarray, int]:
    compiled = compile_model(basic.model)
    rewards = _reward_matrix(compiled, basic)
    bounds = basic.bounds
    n = basic.n_objectives
    k_max = basic.k_max
    unbounded = [i for i, k in enumerate(bounds) if k is None]
    sweeper = _Sweeper(compiled, nature, relative)

    def rows_of(choice: Dict[str, str]) -> np.ndarray:
        return np.asarray(
            [
                compiled.row_of(s, choice[sid]) if sid in choice else compiled.row_ptr[s]
                for s, sid in enumerate(compiled.state_ids)
            ],
            dtype=np.int64,
        )

    # Phase 1: unbounded objectives, weighted.
    weighted = w[unbounded] @ rewards[unbounded] if unbounded else np.zeros(compiled.n_rows)
    tail_rows = rows_of(fixed.tail) if fixed is not None else None
    x, tail_rows, tail_probs, _, sweeps = sweeper.converge(
        weighted, epsilon, max_iterations, fixed_rows=tail_rows
    )

    silent = [i for i in unbounded if w[i] == 0]
    if fixed is None and nature is Direction.MIN and silent:
        # Among weighted-optimal actions, prefer those best for the zero-weight objectives.
        values, _ = robust_extremum_rows(compiled, x, nature)
        q = weighted + values
        best, _ = group_argmax(q, compiled.row_ptr)
        slack = min(LEXICOGRAPHIC_TOLERANCE, 10 * epsilon)
        allowed = q >= np.repeat(best, np.diff(compiled.row_ptr)) - slack
        secondary = rewards[silent].sum(axis=0)
        x_silent, refined_rows, _, _, _ = sweeper.converge(
            secondary, epsilon, max_iterations, allowed=allowed
        )
        # nature still minimizes the weighted value; ties go against the zero-weight objectives
        _, refined_probs = robust_extremum_rows(
            compiled, x, nature, rows=refined_rows, tie_values=x_silent
        )
        try:
            x_refined, _, _, _, _ = sweeper.converge(
                weighted, epsilon, max_iterations, fixed_rows=refined_rows
            )
        except ConvergenceError:
            x_refined = None
        if x_refined is not None and np.all(x_refined >= x - slack):
            tail_rows, tail_probs = refined_rows, refined_probs
        else:
            logger.warning("Zero-weight refinement lowers the weighted value, keeping the weighted choice")

    # Phase 2: evaluate each unbounded objective under the tail choice and its natures.
    per_objective = np.zeros((n, compiled.n_states))
    if unbounded:
        values = sweeper.evaluate(tail_rows, tail_probs, rewards[unbounded], epsilon, max_iterations)
        per_objective[unbounded] = values.T

    per_step: Dict[int, Dict[str, str]] = {}
    natures: Dict[int, Dict[str, Dict[str, float]]] = {k_max: _distributions(compiled, tail_rows, tail_probs)}

    # Phase 3: bounded steps, backwards.
    for j in range(k_max, 0, -1):
        active = [i for i, k in enumerate(bounds) if k is None or k >= j]
        step_rewards = w[active] @ rewards[active] if active else np.zeros(compiled.n_rows)
        fixed_rows = rows_of(fixed.per_step.get(j, fixed.tail)) if fixed is not None else None
        silent_active = [i for i in active if w[i] == 0]
        tie_values = per_objective[silent_active].sum(axis=0) if silent_active else None
        y, rows, probs, _ = sweeper.sweep(x, step_rewards, fixed_rows, tie_values=tie_values)
        for i in active:
            successor = np.where(compiled.mask[rows], per_objective[i][compiled.targets[rows]], 0.0)
            per_objective[i] = rewards[i, rows] + np.sum(probs * successor, axis=1)
        x = y
        per_step[j] = _choice(compiled, rows)
        natures[j - 1] = _distributions(compiled, rows, probs)

    strategy = CountingStrategy(per_step=per_step, tail=_choice(compiled, tail_rows), natures=natures)
    return strategy, per_objective, x, sweeps


def weighted_robust_vi(
    basic: BasicQuery,
    w: Sequence[float],
    epsilon: float = EPSILON,
    max_iterations: int = VI_MAX_ITERATIONS,
    cooperative: bool = False,
    relative: bool = VI_RELATIVE_RESIDUAL,
) -> VIResult:
    """
    Robust weighted value iteration.

    Maximizes E[w·r] over counting strategies against a nature that minimizes it. Unbounded
    objectives are solved first, then evaluated one by one under the resulting memoryless
    choice and natures; bounded objectives are handled by a backward loop over the steps
    k_max..1, starting from the unbounded values.

    Args:
        basic (BasicQuery): Maximizing objectives on the product model.
        w (Sequence[float]): Weight vector, one entry per objective.
        epsilon (float): Absolute residual at which iteration stops.
        max_iterations (int): Sweep cap for the iterative phases.
        cooperative (bool): Let nature maximize instead (used for lower bounds only).
        relative (bool): Divide the residual by the largest value magnitude.

    Returns:
        VIResult: The counting strategy, the per-objective vector g at the initial state and the
            weighted value.

    Raises:
        ConvergenceError: If an iterative phase exceeds the cap.
    """
    w = np.asarray(w, dtype=float)
    if len(w) != basic.n_objectives:
        raise DimensionMismatchError(f"{len(w)} weights for {basic.n_objectives} objectives")
    nature = Direction.MAX if cooperative else Direction.MIN
    strategy, per_objective, x, sweeps = _run_phases(
        basic, w, epsilon, max_iterations, nature, relative
    )
    initial = compile_model(basic.model).initial
    g = [float(v) for v in per_objective[:, initial]]
    logger.debug("Weighted value iteration finished", weights=w.tolist(), g=g, sweeps=sweeps)
    return VIResult(
        strategy=strategy,
        g=g,
        weights=w.tolist(),
        weighted_value=float(x[initial]),
        state=ValueState(x=x.tolist(), x_i=per_objective.tolist(), iterations=sweeps),
    )


def evaluate_strategy(
    basic: BasicQuery,
    strategy: CountingStrategy,
    epsilon: float = EPSILON,
    weights: Optional[Sequence[float]] = None,
    max_iterations: int = VI_MAX_ITERATIONS,
) -> List[float]:
    """Robust per-objective values of a fixed counting strategy.

    Without weights every objective faces its own worst-case nature. With weights the nature
    minimizes the weighted value, which reproduces the g reported by weighted_robust_vi for the
    same weights.
    """
    n = basic.n_objectives
    initial = compile_model(basic.model).initial
    if weights is not None:
        _, per_objective, _, _ = _run_phases(
            basic, np.asarray(weights, dtype=float), epsilon, max_iterations, Direction.MIN,
            VI_RELATIVE_RESIDUAL, fixed=strategy,
        )
        return [float(v) for v in per_objective[:, initial]]

    values = []
    for i in range(n):
        unit = np.zeros(n)
        unit[i] = 1.0
        _, per_objective, _, _ = _run_phases(
            basic, unit, epsilon, max_iterations, Direction.MIN, VI_RELATIVE_RESIDUAL, fixed=strategy
        )
        values.append(float(per_objective[i, initial]))
    return values
