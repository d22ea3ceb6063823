import math
from typing import List, Sequence, Tuple

import numpy as np

from app.errors import DimensionMismatchError, ImdpError

from .lp import Points, as_matrix

Point2 = Tuple[float, float]


def pareto_frontier_2d(points: Points) -> List[Point2]:
    """Vertices of the upper-right boundary of dwc(conv X).

    Dominated points and points on or under a chord of their neighbours are dropped; the result
    increases strictly in the first coordinate and decreases strictly in the second.
    """
    matrix = as_matrix(points)
    if len(matrix) == 0:
        return []
    if matrix.shape[1] != 2:
        raise DimensionMismatchError(f"frontier needs 2 objectives, got {matrix.shape[1]}")

    candidates = sorted({(float(x), float(y)) for x, y in matrix}, key=lambda p: (-p[0], -p[1]))
    undominated: List[Point2] = []
    for point in candidates:
        if not undominated or point[1] > undominated[-1][1]:
            undominated.append(point)
    undominated.reverse()

    hull: List[Point2] = []
    for point in undominated:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], point) >= 0:
            hull.pop()
        hull.append(point)
    return hull


def _cross(o: Point2, a: Point2, b: Point2) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def distance_to_dwc_2d(points: Points, p: Sequence[float], tolerance: float = 1e-12) -> float:
    """Euclidean distance from p to the downward closure of conv X (2 objectives)."""
    vertices = pareto_frontier_2d(points)
    if not vertices:
        raise ImdpError("distance to the closure of an empty point set")
    px, py = float(p[0]), float(p[1])
    xs = np.array([v[0] for v in vertices])
    ys = np.array([v[1] for v in vertices])
    if px <= xs[-1] + tolerance and py <= float(np.interp(px, xs, ys)) + tolerance:
        return 0.0

    first, last = vertices[0], vertices[-1]
    # leftward ray from the first vertex, downward ray from the last one
    best = abs(py - first[1]) if px <= first[0] else math.dist((px, py), first)
    best = min(best, abs(px - last[0]) if py <= last[1] else math.dist((px, py), last))
    for a, b in zip(vertices, vertices[1:]):
        best = min(best, _segment_distance((px, py), a, b))
    return best


def _segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    length2 = dx * dx + dy * dy
    if length2 == 0:
        return math.dist(p, a)
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / length2
    t = min(1.0, max(0.0, t))
    return math.dist(p, (a[0] + t * dx, a[1] + t * dy))
