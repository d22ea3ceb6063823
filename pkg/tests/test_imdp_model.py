import numpy as np
import pytest

from app.imdp import (
    compile_model,
    group_argmax,
    reachable_states,
    strong_end_components,
    terminal_states,
    validate,
)
from app.errors import UnknownStateError
from app.models.imdp_models import Imdp, IntervalRow


def rules(model: Imdp) -> set:
    return {v.rule for v in validate(model)}


def with_row(model: Imdp, key, row: IntervalRow) -> Imdp:
    transitions = dict(model.transitions)
    transitions[key] = row
    return model.model_copy(update={"transitions": transitions})


def test_running_model_is_valid(running_model):
    assert validate(running_model) == []


def test_zero_lower_bound_is_reported(running_model):
    broken = with_row(running_model, ("s", "a"), IntervalRow.from_bounds({"t": (0.0, 0.5), "u": (0.5, 1.0)}))
    violations = validate(broken)
    assert [(v.rule, v.state, v.action) for v in violations] == [("lower-bound", "s", "a")]


def test_infeasible_sums_are_reported(running_model):
    too_heavy = with_row(running_model, ("s", "a"), IntervalRow.from_bounds({"t": (0.6, 0.7), "u": (0.6, 0.7)}))
    assert "lower-sum" in rules(too_heavy)
    too_light = with_row(running_model, ("s", "a"), IntervalRow.from_bounds({"t": (0.1, 0.3), "u": (0.1, 0.3)}))
    assert "upper-sum" in rules(too_light)


def test_structural_violations(running_model):
    unknown = with_row(running_model, ("s", "a"), IntervalRow.from_bounds({"nowhere": (1.0, 1.0)}))
    assert "unknown-target" in rules(unknown)

    no_actions = running_model.model_copy(update={"enabled": {**running_model.enabled, "u": []}})
    assert "no-actions" in rules(no_actions)

    bad_initial = running_model.model_copy(update={"initial": "z"})
    assert "unknown-initial" in rules(bad_initial)


def test_reachable_states(running_model):
    assert reachable_states(running_model, "s") == {"s", "t", "u"}
    assert reachable_states(running_model, "t") == {"t"}
    with pytest.raises(UnknownStateError):
        reachable_states(running_model, "z")


def test_strong_end_components(running_model):
    secs = strong_end_components(running_model)
    assert [(sec.states, sec.actions) for sec in secs] == [(["t"], {"t": ["a"]}), (["u"], {"u": ["b"]})]


def test_end_component_needs_every_successor_inside(chain_model):
    cycle = Imdp(
        states=["p", "q", "z"],
        initial="p",
        actions=["go", "leak"],
        enabled={"p": ["go", "leak"], "q": ["go"], "z": ["go"]},
        transitions={
            ("p", "go"): IntervalRow.from_bounds({"q": (1.0, 1.0)}),
            ("p", "leak"): IntervalRow.from_bounds({"q": (0.5, 0.5), "z": (0.5, 0.5)}),
            ("q", "go"): IntervalRow.from_bounds({"p": (1.0, 1.0)}),
            ("z", "go"): IntervalRow.from_bounds({"z": (1.0, 1.0)}),
        },
    )
    secs = strong_end_components(cycle)
    assert [(sec.states, sec.actions) for sec in secs] == [
        (["p", "q"], {"p": ["go"], "q": ["go"]}),
        (["z"], {"z": ["go"]}),
    ]


def test_terminal_states(running_model, chain_model):
    assert terminal_states(running_model) == {"t", "u"}
    assert terminal_states(chain_model) == {"t", "v", "w"}
    rewarded = running_model.model_copy(
        update={"rewards": {"r": {**running_model.rewards["r"], ("t", "a"): 1.0}}}
    )
    assert terminal_states(rewarded) == {"u"}


def test_compiled_layout(running_model):
    compiled = compile_model(running_model)
    assert compiled.n_states == 3
    assert compiled.n_rows == 4
    assert compiled.row_action == ["a", "b", "a", "b"]
    assert compiled.row_state.tolist() == [0, 0, 1, 2]
    assert compiled.row_of(0, "b") == 1
    assert compiled.reward_vector("r").tolist() == [3.0, 1.0, 0.0, 0.0]
    assert compiled.reward_vector("missing").tolist() == [0.0] * 4


def test_group_argmax_takes_first_maximum():
    q = np.array([1.0, 2.0, 2.0, 5.0, 0.0])
    row_ptr = np.array([0, 3, 5])
    best, rows = group_argmax(q, row_ptr)
    assert best.tolist() == [2.0, 5.0]
    assert rows.tolist() == [1, 3]
