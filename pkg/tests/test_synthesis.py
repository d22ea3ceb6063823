import numpy as np
import pytest

from app.constants import Direction, ObjectiveKind, Outcome, QueryMode, Relation
from app.engine import pareto_2d, quantitative, run_query, synthesize, weighted_robust_vi
from app.errors import DimensionMismatchError
from app.geometry import max_min_slack
from app.models.query_models import Objective, Query
from app.query import prepare_query, to_basic_form
from app.strategy import brute_force_achievable


def test_running_thresholds_are_achievable(running_basic):
    result = synthesize(running_basic)
    assert result.status is Outcome.ACHIEVABLE
    assert sum(result.mixture) == pytest.approx(1.0)
    combined = np.asarray(result.mixture) @ result.points.as_array()
    assert np.all(combined >= np.asarray(running_basic.thresholds) - 1e-6)
    assert len(result.trace) >= 1


def test_high_reach_threshold_is_unachievable(running_basic):
    result = synthesize(running_basic.with_thresholds([0.41, 0.0]))
    assert result.status is Outcome.UNACHIEVABLE
    assert result.mixture is None


def test_mixture_is_needed_between_the_vertices(running_basic):
    result = synthesize(running_basic.with_thresholds([0.35, 2.0]))
    assert result.status is Outcome.ACHIEVABLE
    assert len([p for p in result.mixture if p > 1e-9]) == 2


def test_iteration_cap_is_undecided(running_basic):
    result = synthesize(running_basic.with_thresholds([0.35, 2.0]), max_iterations=1)
    assert result.status is Outcome.UNDECIDED


def test_quantitative_reward_under_reach_constraint(running_basic):
    assert quantitative(running_basic.with_thresholds([1 / 3, 0.0]), index=1).value == pytest.approx(3.0, abs=1e-4)
    assert quantitative(running_basic.with_thresholds([2 / 5, 0.0]), index=1).value == pytest.approx(1.0, abs=1e-4)
    assert quantitative(running_basic.with_thresholds([0.5, 0.0]), index=1).status is Outcome.UNACHIEVABLE


def test_quantitative_history_never_decreases(running_basic):
    result = quantitative(running_basic.with_thresholds([0.35, 0.0]), index=1)
    assert result.status is Outcome.ACHIEVABLE
    assert result.value == pytest.approx(2.5, abs=1e-4)
    assert all(b >= a - 1e-12 for a, b in zip(result.history, result.history[1:]))


def test_quantitative_index_is_checked(running_basic):
    with pytest.raises(DimensionMismatchError):
        quantitative(running_basic, index=2)


def test_pareto_vertices(running_basic):
    approx = pareto_2d(running_basic, epsilon=1e-4)
    assert approx.status is Outcome.ACHIEVABLE
    assert approx.vertices == pytest.approx([[1 / 3, 3.0], [2 / 5, 1.0]], abs=1e-6)
    assert len(approx.supports) == 2


@pytest.mark.parametrize("spread", [0.0, 0.2])
@pytest.mark.parametrize("seed", range(4))
def test_pareto_vertices_are_optimal_for_their_weights(random_basic, seed, spread):
    basic = random_basic(seed, bounds=(1, 2), spread=spread)
    approx = pareto_2d(basic, epsilon=1e-6)
    assert approx.status is Outcome.ACHIEVABLE
    achieved = approx.points.as_array()
    for vertex, supports in zip(approx.vertices, approx.supports, strict=True):
        for u in supports:
            u = np.asarray(u)
            assert np.dot(u, vertex) == pytest.approx(weighted_robust_vi(basic, u, 1e-6).weighted_value, abs=1e-6)
            if spread == 0.0:
                # other points faced natures chosen for other weights
                assert np.all(achieved @ u <= np.dot(u, vertex) + 1e-6)


def test_minimized_reward_is_the_negated_maximum(running_model):
    query = Query(
        mode=QueryMode.PARETO,
        objectives=[
            Objective(kind=ObjectiveKind.REACH, target=["t"], op=Relation.GE, step_bound=1),
            Objective(kind=ObjectiveKind.REWARD, structure="r", op=Relation.LE, step_bound=1),
        ],
    )
    internal = pareto_2d(to_basic_form(running_model, query))
    assert internal.vertices == pytest.approx([[2 / 5, -1.0]], abs=1e-6)
    assert run_query(running_model, query).vertices == pytest.approx([[2 / 5, 1.0]], abs=1e-6)


def test_run_query_synth(running_model, running_query):
    report = run_query(running_model, running_query)
    assert report.status is Outcome.ACHIEVABLE
    assert report.thresholds == pytest.approx([1 / 3, 1 / 4])
    assert report.strategy is not None
    assert sum(report.strategy.probabilities) == pytest.approx(1.0)


def test_run_query_qnt_minimizes_in_user_units(running_model, objectives):
    query = Query(
        mode=QueryMode.QNT, objectives=objectives(reach="1/3"), qnt_index=1, direction=Direction.MIN
    )
    report = run_query(running_model, query)
    assert report.status is Outcome.ACHIEVABLE
    assert report.value == pytest.approx(1.0, abs=1e-4)


def test_run_query_pareto(running_model, objectives):
    report = run_query(running_model, Query(mode=QueryMode.PARETO, objectives=objectives()))
    assert report.vertices == pytest.approx([[1 / 3, 3.0], [2 / 5, 1.0]], abs=1e-6)


def test_run_query_respects_query_overrides(running_model, objectives):
    query = Query(objectives=objectives(reach=0.35, reward=2.0), max_iters=1)
    assert run_query(running_model, query).status is Outcome.UNDECIDED
    assert run_query(running_model, query, max_iterations=50).status is Outcome.ACHIEVABLE


def test_prepared_query_matches_run_query(running_model, running_query):
    basic = prepare_query(running_model, running_query)
    assert synthesize(basic).status is run_query(running_model, running_query).status


def test_near_tie_thresholds_are_achievable(near_tie_basic):
    result = synthesize(near_tie_basic)
    assert result.status is Outcome.ACHIEVABLE
    assert any(p == pytest.approx([1.0, 0.0], abs=1e-9) for p in result.points.as_array().tolist())


def test_last_point_is_checked_at_the_iteration_cap(running_basic):
    result = synthesize(running_basic, max_iterations=1)
    assert result.status is Outcome.ACHIEVABLE
    assert result.points.as_array().tolist() == pytest.approx([[1 / 3, 3.0]], abs=1e-6)


AGREEMENT_BAND = 1e-5


@pytest.mark.parametrize("spread", [0.0, 0.2])
@pytest.mark.parametrize("seed", range(4))
def test_synthesis_agrees_with_enumeration(random_basic, seed, spread):
    basic = random_basic(seed, bounds=(1, 2), spread=spread)
    points = brute_force_achievable(basic)
    top = points.as_array().max(axis=0)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        r = rng.uniform(0.5, 1.1, size=2) * top
        slack, _ = max_min_slack(points, r)
        status = synthesize(basic.with_thresholds(r.tolist()), epsilon=1e-10).status
        if slack > AGREEMENT_BAND:
            assert status is Outcome.ACHIEVABLE
        elif slack < -AGREEMENT_BAND and spread == 0.0:
            # point intervals leave nature no choice, so both sides see the same values
            assert status is Outcome.UNACHIEVABLE