import numpy as np
import pytest

from app.constants import Direction
from app.errors import InfeasibleRowError, TooManyTargetsError
from app.imdp import (
    compile_model,
    midpoint_distribution,
    robust_extremum,
    robust_extremum_rows,
    vertex_enumerate,
)
from app.models.imdp_models import IntervalRow


def test_minimizing_nature_on_running_row(running_model):
    value, witness = robust_extremum(running_model.row("s", "a"), {"t": 1.0, "u": 0.0}, Direction.MIN)
    assert value == pytest.approx(1 / 3)
    assert witness.probs == pytest.approx({"t": 1 / 3, "u": 2 / 3})


def test_maximizing_nature_on_running_row(running_model):
    value, witness = robust_extremum(running_model.row("s", "b"), {"t": 1.0, "u": 0.0}, Direction.MAX)
    assert value == pytest.approx(3 / 5)
    assert witness.probs == pytest.approx({"t": 3 / 5, "u": 2 / 5})


def test_ties_fill_lower_state_index_first():
    row = IntervalRow.from_bounds({"a": (0.2, 0.6), "b": (0.2, 0.6)})
    _, witness = robust_extremum(row, {"a": 1.0, "b": 1.0})
    assert witness.probs == pytest.approx({"a": 0.6, "b": 0.4})


def test_infeasible_row_raises():
    row = IntervalRow.from_bounds({"a": (0.1, 0.3), "b": (0.1, 0.3)})
    with pytest.raises(InfeasibleRowError):
        robust_extremum(row, {"a": 0.0, "b": 1.0})


def test_vertex_enumeration_counts():
    row = IntervalRow.from_bounds({"a": (0.2, 0.5), "b": (0.2, 0.5), "c": (0.2, 0.5)})
    vertices = vertex_enumerate(row)
    assert len(vertices) == 6
    for vertex in vertices:
        assert sum(vertex.probs.values()) == pytest.approx(1.0)
        assert sorted(vertex.probs.values()) == pytest.approx([0.2, 0.3, 0.5])


def test_vertex_enumeration_limit():
    row = IntervalRow.from_bounds({f"s{i}": (0.01, 1.0) for i in range(9)})
    with pytest.raises(TooManyTargetsError):
        vertex_enumerate(row)


def _random_row(rng: np.random.Generator) -> IntervalRow:
    size = int(rng.integers(2, 6))
    nominal = rng.dirichlet(np.ones(size))
    below, above = rng.uniform(0.0, 0.3, size), rng.uniform(0.0, 0.3, size)
    return IntervalRow.from_bounds(
        {
            f"s{i}": (max(0.0, p - lo), min(1.0, p + hi))
            for i, (p, lo, hi) in enumerate(zip(nominal, below, above, strict=True))
        }
    )


@pytest.mark.parametrize("seed", range(10))
def test_greedy_matches_best_vertex(seed):
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        row = _random_row(rng)
        values = dict(zip(row.targets, rng.normal(size=len(row.targets)).tolist(), strict=True))
        vertex_values = [v.dot(values) for v in vertex_enumerate(row)]
        assert robust_extremum(row, values, Direction.MIN)[0] == pytest.approx(min(vertex_values), abs=1e-9)
        assert robust_extremum(row, values, Direction.MAX)[0] == pytest.approx(max(vertex_values), abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_min_is_negated_max_of_negated_values(seed):
    rng = np.random.default_rng(seed)
    for _ in range(200):
        row = _random_row(rng)
        values = dict(zip(row.targets, rng.normal(size=len(row.targets)).tolist(), strict=True))
        negated = {t: -v for t, v in values.items()}
        low, _ = robust_extremum(row, values, Direction.MIN)
        high, _ = robust_extremum(row, negated, Direction.MAX)
        assert low == pytest.approx(-high, abs=1e-12)


@pytest.mark.parametrize("direction", list(Direction))
def test_witness_lies_in_the_row(direction):
    rng = np.random.default_rng(11)
    for _ in range(500):
        row = _random_row(rng)
        values = dict(zip(row.targets, rng.normal(size=len(row.targets)).tolist(), strict=True))
        value, witness = robust_extremum(row, values, direction)
        assert sum(witness.probs.values()) == pytest.approx(1.0, abs=1e-12)
        for target, (lower, upper) in row.bounds().items():
            assert lower - 1e-12 <= witness.probs[target] <= upper + 1e-12
        assert witness.dot(values) == pytest.approx(value, abs=1e-12)


def test_value_is_monotone_in_the_successor_values():
    rng = np.random.default_rng(12)
    for _ in range(500):
        row = _random_row(rng)
        values = rng.normal(size=len(row.targets))
        larger = values + rng.uniform(0.0, 1.0, size=len(values))
        for direction in Direction:
            low, _ = robust_extremum(row, dict(zip(row.targets, values.tolist(), strict=True)), direction)
            high, _ = robust_extremum(row, dict(zip(row.targets, larger.tolist(), strict=True)), direction)
            assert low <= high + 1e-12


def test_midpoint_is_feasible(running_model):
    witness = midpoint_distribution(running_model.row("s", "a"))
    assert witness.probs["t"] == pytest.approx(54 / 111)
    assert sum(witness.probs.values()) == pytest.approx(1.0)


def test_vectorized_rows_agree_with_scalar(running_model):
    compiled = compile_model(running_model)
    values = np.array([0.5, 1.0, 0.0])
    for direction in Direction:
        row_values, probs = robust_extremum_rows(compiled, values, direction)
        for r, action in enumerate(compiled.row_action):
            state = compiled.state_ids[compiled.row_state[r]]
            expected, witness = robust_extremum(
                running_model.row(state, action), {"s": 0.5, "t": 1.0, "u": 0.0}, direction
            )
            assert row_values[r] == pytest.approx(expected)
            listed = [compiled.state_ids[t] for t in compiled.targets[r][compiled.mask[r]]]
            assert dict(zip(listed, probs[r][compiled.mask[r]], strict=True)) == pytest.approx(witness.probs)
