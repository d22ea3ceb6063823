import numpy as np
import pytest

from app.engine import evaluate_strategy, weighted_robust_vi
from app.errors import DimensionMismatchError
from app.geometry import in_downward_closure
from app.models.query_models import Query
from app.query import to_basic_form
from app.strategy import brute_force_achievable, brute_force_weighted_value


def test_reward_weight_picks_the_rewarding_action(running_basic):
    result = weighted_robust_vi(running_basic, [0.0, 1.0])
    assert result.strategy.action("s|", 0) == "a"
    assert result.g == pytest.approx([1 / 3, 3.0], abs=1e-6)
    assert result.weighted_value == pytest.approx(3.0, abs=1e-6)


def test_reach_weight_picks_the_safer_action(running_basic):
    result = weighted_robust_vi(running_basic, [1.0, 0.0])
    assert result.strategy.action("s|", 0) == "b"
    assert result.g == pytest.approx([2 / 5, 1.0], abs=1e-6)


def test_recorded_nature_is_the_worst_case(running_basic):
    result = weighted_robust_vi(running_basic, [1.0, 0.0])
    nature = result.strategy.natures[0]["s|"]
    assert nature["t|"] == pytest.approx(2 / 5)
    assert nature["u|"] == pytest.approx(3 / 5)


def test_weight_length_is_checked(running_basic):
    with pytest.raises(DimensionMismatchError):
        weighted_robust_vi(running_basic, [1.0])


def test_cooperative_nature_is_never_worse(running_basic):
    robust = weighted_robust_vi(running_basic, [1.0, 0.0])
    cooperative = weighted_robust_vi(running_basic, [1.0, 0.0], cooperative=True)
    assert cooperative.weighted_value >= robust.weighted_value
    assert cooperative.g[0] == pytest.approx(2 / 3, abs=1e-6)


def test_evaluate_fixed_strategies(running_basic, always):
    assert evaluate_strategy(running_basic, always(running_basic, "a")) == pytest.approx([1 / 3, 3.0], abs=1e-6)
    assert evaluate_strategy(running_basic, always(running_basic, "b")) == pytest.approx([2 / 5, 1.0], abs=1e-6)


def test_evaluation_with_weights_reproduces_vi(running_basic):
    w = [0.7, 0.3]
    result = weighted_robust_vi(running_basic, w)
    assert evaluate_strategy(running_basic, result.strategy, weights=w) == pytest.approx(result.g, abs=1e-6)


def test_unbounded_reachability(running_model, objectives):
    unbounded = [o.model_copy(update={"step_bound": None}) for o in objectives()]
    basic = to_basic_form(running_model, Query(objectives=unbounded[:1]))
    result = weighted_robust_vi(basic, [1.0])
    assert result.g == pytest.approx([2 / 5], abs=1e-6)


WEIGHTS = [[1.0, 0.0], [0.0, 1.0], [0.3, 0.7]]


@pytest.mark.parametrize("w", WEIGHTS)
@pytest.mark.parametrize("seed", range(6))
def test_weighted_value_matches_brute_force(random_basic, seed, w):
    basic = random_basic(seed, bounds=(1, 2))
    result = weighted_robust_vi(basic, w, epsilon=1e-10)
    assert result.weighted_value == pytest.approx(brute_force_weighted_value(basic, w), abs=1e-6)
    assert np.dot(w, result.g) == pytest.approx(result.weighted_value, abs=1e-6)


@pytest.mark.parametrize("bounds", [(None, None), (None, 1), (1, None)])
@pytest.mark.parametrize("seed", range(4))
def test_unbounded_weighted_value_matches_brute_force(random_basic, seed, bounds):
    basic = random_basic(seed, bounds=bounds, absorbing=True)
    rng = np.random.default_rng(100 + seed)
    for w in WEIGHTS + [list(rng.dirichlet(np.ones(2)))]:
        result = weighted_robust_vi(basic, w, epsilon=1e-10)
        assert result.weighted_value == pytest.approx(brute_force_weighted_value(basic, w), abs=1e-6)
        assert np.dot(w, result.g) == pytest.approx(result.weighted_value, abs=1e-6)


def test_point_intervals_agree_per_objective(random_basic):
    # without interval freedom the weighted nature is every objective's worst nature
    basic = random_basic(7, bounds=(None, 1), absorbing=True, spread=0.0)
    points = brute_force_achievable(basic)
    for w in WEIGHTS:
        g = weighted_robust_vi(basic, w, epsilon=1e-10).g
        assert np.max(points.as_array() @ np.asarray(w)) == pytest.approx(np.dot(w, g), abs=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_optimal_points_dominate_every_strategy_in_weight(random_basic, seed):
    basic = random_basic(seed)
    points = brute_force_achievable(basic)
    for w in ([1.0, 0.0], [0.5, 0.5], [0.0, 1.0]):
        value = weighted_robust_vi(basic, w, epsilon=1e-10).weighted_value
        assert np.max(points.as_array() @ np.asarray(w)) <= value + 1e-6


def test_brute_force_running_example(running_basic):
    points = brute_force_achievable(running_basic)
    assert in_downward_closure(points, [1 / 3, 1 / 4])
    assert in_downward_closure(points, [0.35, 2.0])
    assert not in_downward_closure(points, [0.41, 0.0])


def test_zero_weight_tie_break_keeps_the_weighted_optimum(near_tie_basic):
    result = weighted_robust_vi(near_tie_basic, [1.0, 0.0])
    assert result.strategy.action("s", 0) == "a"
    assert result.g == pytest.approx([1.0, 0.0], abs=1e-9)


def test_zero_weight_tie_break_prefers_the_silent_objective_on_exact_ties(near_tie_basic):
    model = near_tie_basic.model.model_copy(
        update={"rewards": {"r1": {("s", "a"): 1.0, ("s", "b"): 1.0}, "r2": {("s", "b"): 10.0}}}
    )
    result = weighted_robust_vi(near_tie_basic.model_copy(update={"model": model}), [1.0, 0.0])
    assert result.strategy.action("s", 0) == "b"
    assert result.g == pytest.approx([1.0, 10.0], abs=1e-9)
