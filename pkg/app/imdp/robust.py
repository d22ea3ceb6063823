import itertools
import math
from typing import List, Mapping, Optional, Tuple

import numpy as np

from app.config import VERTEX_ENUMERATION_LIMIT
from app.constants import Direction
from app.errors import InfeasibleRowError, TooManyTargetsError
from app.models.imdp_models import FeasibleDistribution, IntervalRow

from .compiled import CompiledImdp

SUM_TOLERANCE = 1e-12


def _check_feasible(lowers: List[float], uppers: List[float]) -> float:
    total_lower = math.fsum(lowers)
    if total_lower > 1 + SUM_TOLERANCE or math.fsum(uppers) < 1 - SUM_TOLERANCE:
        raise InfeasibleRowError(
            f"interval row admits no distribution (sum lower={total_lower}, "
            f"sum upper={math.fsum(uppers)})"
        )
    return total_lower


def robust_extremum(
    row: IntervalRow,
    values: Mapping[str, float],
    direction: Direction = Direction.MIN,
) -> Tuple[float, FeasibleDistribution]:
    """
    Optimize a linear function over the distributions allowed by an interval row.

    Every entry starts at its lower bound; the remaining mass is poured into the entries in
    ascending (min) or descending (max) order of their value until each reaches its upper bound.
    Ties keep the row order, which is ascending state index.

    Args:
        row (IntervalRow): Feasible set.
        values (Mapping[str, float]): Value of every row target.
        direction (Direction): Whether nature minimizes or maximizes.

    Returns:
        Tuple[float, FeasibleDistribution]: Optimal value and a distribution attaining it.

    Raises:
        InfeasibleRowError: If the row admits no distribution.
    """
    entries = row.entries
    lowers = [e.lower for e in entries]
    uppers = [e.upper for e in entries]
    remaining = 1.0 - _check_feasible(lowers, uppers)

    sign = 1.0 if direction is Direction.MIN else -1.0
    order = sorted(range(len(entries)), key=lambda i: sign * values[entries[i].target])
    probs = list(lowers)
    for i in order:
        if remaining <= 0:
            break
        extra = min(remaining, uppers[i] - lowers[i])
        probs[i] += extra
        remaining -= extra

    value = math.fsum(p * values[e.target] for p, e in zip(probs, entries, strict=True))
    witness = FeasibleDistribution(probs={e.target: p for e, p in zip(entries, probs, strict=True)})
    return value, witness


def vertex_enumerate(row: IntervalRow, limit: int = VERTEX_ENUMERATION_LIMIT) -> List[FeasibleDistribution]:
    """All vertices of {lower <= p <= upper, sum p = 1}; a test oracle for small rows."""
    entries = row.entries
    k = len(entries)
    if k > limit:
        raise TooManyTargetsError(f"vertex enumeration limited to {limit} targets, row has {k}")
    _check_feasible([e.lower for e in entries], [e.upper for e in entries])

    seen = set()
    vertices: List[FeasibleDistribution] = []
    for free in range(k):
        others = [i for i in range(k) if i != free]
        for choice in itertools.product((0, 1), repeat=k - 1):
            probs = [0.0] * k
            for i, at_upper in zip(others, choice, strict=True):
                probs[i] = entries[i].upper if at_upper else entries[i].lower
            rest = 1.0 - math.fsum(probs)
            lo, hi = entries[free].lower, entries[free].upper
            if rest < lo - SUM_TOLERANCE or rest > hi + SUM_TOLERANCE:
                continue
            probs[free] = min(max(rest, lo), hi)
            key = tuple(round(p, 12) for p in probs)
            if key in seen:
                continue
            seen.add(key)
            vertices.append(
                FeasibleDistribution(probs={e.target: p for e, p in zip(entries, probs, strict=True)})
            )
    return vertices


def midpoint_distribution(row: IntervalRow) -> FeasibleDistribution:
    """Scale every slack by the same factor so that the distribution sums to 1."""
    lowers = [e.lower for e in row.entries]
    uppers = [e.upper for e in row.entries]
    total_lower = _check_feasible(lowers, uppers)
    total_slack = math.fsum(uppers) - total_lower
    theta = 0.0 if total_slack <= 0 else (1.0 - total_lower) / total_slack
    return FeasibleDistribution(
        probs={e.target: e.lower + theta * (e.upper - e.lower) for e in row.entries}
    )


def robust_extremum_rows(
    compiled: CompiledImdp,
    values: np.ndarray,
    direction: Direction = Direction.MIN,
    rows: Optional[np.ndarray] = None,
    tie_values: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized greedy over many rows at once; same semantics and tie-breaking as
    robust_extremum.

    With `tie_values`, successors of equal value are ordered by their tie value (in the same
    direction) before falling back to state index.

    Args:
        compiled (CompiledImdp): Numeric model.
        values (np.ndarray): Value per state.
        direction (Direction): Nature's direction.
        rows (Optional[np.ndarray]): Subset of rows; all rows when omitted.
        tie_values (Optional[np.ndarray]): Secondary value per state.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Optimal value per row and the witness probabilities
            aligned with `compiled.targets`.
    """
    targets = compiled.targets if rows is None else compiled.targets[rows]
    lower = compiled.lower if rows is None else compiled.lower[rows]
    upper = compiled.upper if rows is None else compiled.upper[rows]
    mask = compiled.mask if rows is None else compiled.mask[rows]

    successor_values = np.where(mask, values[targets], 0.0)
    key = successor_values if direction is Direction.MIN else -successor_values
    key = np.where(mask, key, np.inf)
    if tie_values is None:
        order = np.argsort(key, axis=1, kind="stable")
    else:
        ties = tie_values[targets] if direction is Direction.MIN else -tie_values[targets]
        positions = np.broadcast_to(np.arange(key.shape[1]), key.shape)
        order = np.lexsort((positions, np.where(mask, ties, np.inf), key), axis=-1)

    slack = np.take_along_axis(upper - lower, order, axis=1)
    remaining = 1.0 - np.sum(lower, axis=1, dtype=np.longdouble)
    filled_before = np.cumsum(slack, axis=1, dtype=np.longdouble) - slack
    extra = np.clip(remaining[:, None] - filled_before, 0.0, slack).astype(float)

    probs = lower.copy()
    np.put_along_axis(probs, order, np.take_along_axis(lower, order, axis=1) + extra, axis=1)
    return np.sum(probs * successor_values, axis=1), probs
