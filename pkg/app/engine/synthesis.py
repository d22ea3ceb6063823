from typing import List, Optional, Sequence

import numpy as np

from app.config import COMPARISON_TOLERANCE, EPSILON, SYNTH_MAX_ITERATIONS
from app.constants import Outcome, QueryMode
from app.errors import ConvergenceError, DimensionMismatchError
from app.geometry.lp import (
    in_downward_closure,
    max_first_coordinate,
    mixture_weights,
    separating_weight,
)
from app.geometry.pareto import distance_to_dwc_2d, pareto_frontier_2d
from app.imdp.model import reachable_states, strong_end_components
from app.models.geometry_models import PointSet
from app.models.imdp_models import Imdp
from app.models.query_models import BasicQuery, Query
from app.models.result_models import (
    ParetoApprox,
    QuantResult,
    QueryReport,
    SynthesisResult,
    TraceEntry,
)
from app.models.strategy_models import MixtureStrategy
from app.query.transform import prepare_query
from app.utils.logging import get_logger

from .value_iteration import weighted_robust_vi

logger = get_logger("engine", "synthesis")

# mixture components below this probability are dropped from exported strategies
MIXTURE_CUTOFF = 1e-12


def synthesize(
    basic: BasicQuery,
    epsilon: float = EPSILON,
    max_iterations: int = SYNTH_MAX_ITERATIONS,
    tolerance: float = COMPARISON_TOLERANCE,
) -> SynthesisResult:
    """
    Decide whether the thresholds of a basic query are robustly achievable.

    Points achieved by weighted value iteration are collected until the threshold vector lies
    in their downward closure (achievable) or some separating weight cannot be matched
    (unachievable). On success the mixture over the collected points is attached.

    Args:
        basic (BasicQuery): Query with thresholds r.
        epsilon (float): Value-iteration precision.
        max_iterations (int): Maximum number of separating hyperplanes.
        tolerance (float): Slack allowed in the w·g < w·r comparison.

    Returns:
        SynthesisResult: Outcome with points, strategies, mixture and trace. Reaching the cap
            gives an undecided outcome, never an unachievable one.
    """
    r = np.asarray(basic.thresholds, dtype=float)
    points = PointSet()
    trace: List[TraceEntry] = []

    def achieved(iteration: int) -> SynthesisResult:
        mixture = mixture_weights(points, r)
        logger.info("Thresholds achievable", iterations=iteration, points=len(points))
        return SynthesisResult(
            status=Outcome.ACHIEVABLE,
            thresholds=r.tolist(),
            points=points,
            mixture=mixture.tolist(),
            trace=trace,
        )

    for iteration in range(max_iterations):
        if in_downward_closure(points, r):
            return achieved(iteration)
        w = separating_weight(points, r)
        result = weighted_robust_vi(basic, w, epsilon)
        g = np.asarray(result.g)
        trace.append(TraceEntry(weights=w.tolist(), point=result.g))
        logger.debug("Separation step", iteration=iteration, weights=w.tolist(), point=result.g)
        if w @ g < w @ r - tolerance:
            logger.info("Thresholds unachievable", iterations=iteration + 1, weights=w.tolist())
            return SynthesisResult(
                status=Outcome.UNACHIEVABLE, thresholds=r.tolist(), points=points, trace=trace
            )
        points.add(result.g, result.strategy, w)

    if in_downward_closure(points, r):
        return achieved(max_iterations)
    logger.warning("Synthesis undecided at iteration cap", iterations=max_iterations, epsilon=epsilon)
    return SynthesisResult(status=Outcome.UNDECIDED, thresholds=r.tolist(), points=points, trace=trace)


def _minimum_diverges(basic: BasicQuery) -> bool:
    """Whether some strategy can collect negative first-objective reward forever."""
    if basic.bounds[0] is not None:
        return False
    model = basic.model
    structure = basic.structures[0]
    reachable = reachable_states(model, model.initial)
    for sec in strong_end_components(model):
        if not reachable.intersection(sec.states):
            continue
        for state in sec.states:
            if any(model.reward(structure, state, a) < 0 for a in sec.actions[state]):
                return True
    return False


def _least_first_value(basic: BasicQuery, epsilon: float) -> Optional[float]:
    """min over strategies and natures of objective 1, or None if the iteration diverges."""
    unit = np.zeros(basic.n_objectives)
    unit[0] = -1.0
    try:
        result = weighted_robust_vi(basic, unit, epsilon, cooperative=True)
    except ConvergenceError:
        logger.warning("Minimizing initialization did not converge")
        return None
    return -result.weighted_value


def _cover_fixed_thresholds(
    basic: BasicQuery,
    r: np.ndarray,
    points: PointSet,
    trace: List[TraceEntry],
    epsilon: float,
    max_iterations: int,
    tolerance: float,
) -> Optional[Outcome]:
    """Collect points until r[1:] is covered, ignoring objective 1.

    Returns None once covered, otherwise the final outcome. Without other objectives a single
    point maximizing objective 1 is collected instead.
    """
    rest = r[1:]
    if rest.size == 0:
        w = np.ones(1)
        result = weighted_robust_vi(basic, w, epsilon)
        trace.append(TraceEntry(weights=w.tolist(), point=result.g))
        points.add(result.g, result.strategy, w)
        return None
    for _ in range(max_iterations):
        projected = [p[1:] for p in points.points]
        if projected and in_downward_closure(projected, rest):
            return None
        w_rest = separating_weight(projected, rest)
        w = np.concatenate([[0.0], w_rest])
        result = weighted_robust_vi(basic, w, epsilon)
        trace.append(TraceEntry(weights=w.tolist(), point=result.g))
        if w_rest @ np.asarray(result.g[1:]) < w_rest @ rest - tolerance:
            return Outcome.UNACHIEVABLE
        points.add(result.g, result.strategy, w)
    return Outcome.UNDECIDED


def quantitative(
    basic: BasicQuery,
    index: int = 0,
    epsilon: float = EPSILON,
    max_iterations: int = SYNTH_MAX_ITERATIONS,
    tolerance: float = COMPARISON_TOLERANCE,
) -> QuantResult:
    """
    Maximize one objective subject to the thresholds of the others.

    The optimized objective is moved to the front. Its starting value is the least value any
    strategy can get; when that is unbounded (a strategy may collect negative reward forever)
    the fixed thresholds are covered first and the start is the best value among the collected
    points. The value then only grows: each round separates the current vector with a weight
    that keeps the optimized objective positive, and lifts r1 to the best value the collected
    points allow.

    Args:
        basic (BasicQuery): Basic query; the threshold of the optimized objective is ignored.
        index (int): Optimized objective.
        epsilon (float): Value-iteration precision.
        max_iterations (int): Cap on separating hyperplanes.
        tolerance (float): Comparison slack.

    Returns:
        QuantResult: The optimum (in basic-query units) or an unachievable/undecided outcome.
    """
    if not 0 <= index < basic.n_objectives:
        raise DimensionMismatchError(f"objective index {index} out of range")
    order = [index] + [i for i in range(basic.n_objectives) if i != index]
    basic = basic.permuted(order)
    r = np.asarray(basic.thresholds, dtype=float)
    points = PointSet()
    trace: List[TraceEntry] = []

    lower = None if _minimum_diverges(basic) else _least_first_value(basic, epsilon)
    if lower is None:
        logger.info("Minimum of the optimized objective is unbounded, covering thresholds first")
        outcome = _cover_fixed_thresholds(basic, r, points, trace, epsilon, max_iterations, tolerance)
        if outcome is not None:
            return QuantResult(status=outcome, thresholds=r.tolist(), points=points, trace=trace)
        lower = max_first_coordinate(points, r[1:])
    r[0] = lower
    history = [float(r[0])]

    w: Optional[np.ndarray] = None
    g: Optional[np.ndarray] = None
    for iteration in range(max_iterations):
        inside = in_downward_closure(points, r)
        if inside and w is not None and w @ g <= w @ r + max(tolerance, epsilon):
            mixture = mixture_weights(points, r)
            logger.info("Quantitative optimum found", value=float(r[0]), iterations=iteration)
            return QuantResult(
                status=Outcome.ACHIEVABLE,
                value=float(r[0]),
                thresholds=r.tolist(),
                points=points,
                mixture=mixture.tolist(),
                trace=trace,
                history=history,
            )
        w = separating_weight(points, r, positive_coord=0, strict=False)
        result = weighted_robust_vi(basic, w, epsilon)
        g = np.asarray(result.g)
        trace.append(TraceEntry(weights=w.tolist(), point=result.g))
        if w @ g < w @ r - tolerance:
            logger.info("Fixed thresholds unachievable", iterations=iteration + 1)
            return QuantResult(
                status=Outcome.UNACHIEVABLE, thresholds=r.tolist(), points=points, trace=trace,
                history=history,
            )
        points.add(result.g, result.strategy, w)
        best = max_first_coordinate(points, r[1:])
        if best is not None and best > r[0]:
            r[0] = best
        history.append(float(r[0]))

    logger.warning("Quantitative query undecided at iteration cap", iterations=max_iterations)
    return QuantResult(
        status=Outcome.UNDECIDED, value=float(r[0]), thresholds=r.tolist(), points=points,
        trace=trace, history=history,
    )


def pareto_2d(
    basic: BasicQuery,
    epsilon: float = EPSILON,
    max_iterations: int = SYNTH_MAX_ITERATIONS,
) -> ParetoApprox:
    """
    Approximate the Pareto curve of two objectives within distance epsilon.

    Starts from the two axis weights. For every pair of neighbouring frontier vertices the
    supporting lines (the steepest weight at the left vertex, the flattest at the right one)
    are intersected; an intersection farther than epsilon from the closure is separated and
    refined with a new weighted value iteration.
    """
    if basic.n_objectives != 2:
        raise DimensionMismatchError("Pareto approximation takes exactly 2 objectives")
    points = PointSet()
    trace: List[TraceEntry] = []

    def explore(w: np.ndarray) -> None:
        result = weighted_robust_vi(basic, w, epsilon)
        points.add(result.g, result.strategy, w)
        trace.append(TraceEntry(weights=w.tolist(), point=result.g))

    explore(np.array([1.0, 0.0]))
    w: Optional[np.ndarray] = np.array([0.0, 1.0])
    status = Outcome.UNDECIDED
    for _ in range(max_iterations):
        explore(w)
        w = None
        vertices = pareto_frontier_2d(points)
        for left, right in zip(vertices, vertices[1:]):
            u = max(points.weights[points.find(left)], key=lambda v: v[0])
            u_next = min(points.weights[points.find(right)], key=lambda v: v[0])
            system = np.array([u, u_next])
            if abs(np.linalg.det(system)) < 1e-12:
                logger.debug("Parallel supporting lines skipped", left=left, right=right)
                continue
            rhs = np.array([np.dot(u, left), np.dot(u_next, right)])
            p = np.linalg.solve(system, rhs)
            if distance_to_dwc_2d(points, p) >= epsilon:
                w = separating_weight(points, p, strict=False)
                break
        if w is None:
            status = Outcome.ACHIEVABLE
            break
    else:
        logger.warning("Pareto approximation undecided at iteration cap", iterations=max_iterations)

    vertices = pareto_frontier_2d(points)
    supports = [points.weights[points.find(v)] for v in vertices]
    logger.info("Pareto approximation finished", vertices=len(vertices), points=len(points))
    return ParetoApprox(
        status=status,
        vertices=[list(v) for v in vertices],
        epsilon=epsilon,
        supports=supports,
        points=points,
        trace=trace,
    )


def _mixture_strategy(points: PointSet, mixture: Optional[List[float]]) -> Optional[MixtureStrategy]:
    if mixture is None:
        return None
    kept = [(tag, p) for tag, p in zip(points.tags, mixture, strict=True) if p > MIXTURE_CUTOFF]
    total = sum(p for _, p in kept)
    return MixtureStrategy(
        components=[tag for tag, _ in kept], probabilities=[p / total for _, p in kept]
    )


def _unpermute(vector: Sequence[float], order: Sequence[int]) -> List[float]:
    restored = [0.0] * len(order)
    for position, index in enumerate(order):
        restored[index] = float(vector[position])
    return restored


def _in_user_units(basic: BasicQuery, vector: Sequence[float], order: Sequence[int]) -> List[float]:
    """Undo an objective permutation and the negation of minimized objectives."""
    return basic.to_user_units(_unpermute(vector, order))


def run_basic(
    basic: BasicQuery,
    query: Query,
    epsilon: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> QueryReport:
    """
    Dispatch a prepared query on its mode and report in the user's units.

    Explicit arguments win over the query's own `epsilon`/`max_iters`, which win over the
    configured defaults.
    """
    epsilon = epsilon or query.epsilon or EPSILON
    max_iterations = max_iterations or query.max_iters or SYNTH_MAX_ITERATIONS
    logger.info(
        "Running query", mode=query.mode.value, objectives=basic.labels, states=len(basic.model.states)
    )
    identity = list(range(basic.n_objectives))

    if query.mode is QueryMode.SYNTH:
        result = synthesize(basic, epsilon, max_iterations)
        order = identity
        fields = dict(thresholds=_in_user_units(basic, result.thresholds, order), mixture=result.mixture)
    elif query.mode is QueryMode.QNT:
        result = quantitative(basic, query.qnt_index, epsilon, max_iterations)
        order = [query.qnt_index] + [i for i in identity if i != query.qnt_index]
        value = None
        if result.value is not None and result.status is Outcome.ACHIEVABLE:
            value = basic.signs[query.qnt_index] * result.value
        fields = dict(
            thresholds=_in_user_units(basic, result.thresholds, order),
            value=value,
            mixture=result.mixture,
        )
    else:
        result = pareto_2d(basic, epsilon, max_iterations)
        order = identity
        fields = dict(vertices=[_in_user_units(basic, v, order) for v in result.vertices])

    return QueryReport(
        mode=query.mode,
        status=result.status,
        labels=basic.labels,
        points=[_in_user_units(basic, p, order) for p in result.points.points],
        trace=[
            TraceEntry(
                weights=_unpermute(t.weights, order),
                point=_in_user_units(basic, t.point, order),
            )
            for t in result.trace
        ],
        strategy=_mixture_strategy(result.points, fields.get("mixture")),
        epsilon=epsilon,
        **fields,
    )


def run_query(
    model: Imdp,
    query: Query,
    epsilon: Optional[float] = None,
    max_iterations: Optional[int] = None,
) -> QueryReport:
    """
    Run a query end to end: check assumptions, reduce to basic form and dispatch.

    Raises:
        AssumptionError: If the model and query violate the engine's assumptions.
        UnsatisfiableQueryError: If pruning divergent rewards removes the initial state.
    """
    return run_basic(prepare_query(model, query), query, epsilon, max_iterations)
