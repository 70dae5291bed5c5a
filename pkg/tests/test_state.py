from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from citsgraph.errors import ConditionError, UnknownIdError
from citsgraph.state import (
    Condition,
    Effect,
    WorldState,
    apply_effects,
    condition_from_json,
    condition_to_json,
    eval_condition,
    state_diff,
)

ATTACKER = "Attacker_Device"
VEHICLE = "OBU_Vehicle_attacker"
RSU = "RSU_Streetlamp"


def grant(actor, entity, level):
    return Effect("grant_privilege", (actor, entity, level))


def fact(*args):
    return Effect("add_fact", tuple(args))


def test_condition_arity_checked():
    with pytest.raises(ConditionError):
        Condition("has_privilege", (ATTACKER, VEHICLE))
    with pytest.raises(ConditionError):
        Condition("teleport", (ATTACKER,))
    with pytest.raises(ConditionError):
        Condition("has_privilege", (ATTACKER, VEHICLE, "admin"))


def test_effect_arity_checked():
    with pytest.raises(ConditionError):
        Effect("grant_privilege", (ATTACKER, VEHICLE, "none"))
    with pytest.raises(ConditionError):
        Effect("explode", (VEHICLE,))


def test_condition_json_round_trip():
    cond = Condition("fact", ("packets_collected", ATTACKER, RSU), "Property", True)
    assert condition_from_json(condition_to_json(cond)) == cond


def test_privilege_after_grant(initial):
    state = apply_effects(initial, [grant(ATTACKER, VEHICLE, "root")])
    result = eval_condition(state, Condition("has_privilege", (ATTACKER, VEHICLE, "root")))
    assert result.ok


def test_fact_condition_on_empty_state(initial):
    result = eval_condition(initial, Condition("fact", ("anything", ATTACKER)))
    assert not result.ok


def test_can_communicate_condition_in_bundled_env(initial):
    result = eval_condition(initial, Condition("can_communicate", (VEHICLE, RSU)))
    assert result.ok


def test_physical_access_from_environment(initial):
    assert eval_condition(initial, Condition("physical_access", (ATTACKER, VEHICLE))).ok
    assert not eval_condition(initial, Condition("physical_access", (ATTACKER, RSU))).ok


def test_physical_access_from_fact(initial):
    state = apply_effects(initial, [fact("physical_access", ATTACKER, RSU)])
    assert eval_condition(state, Condition("physical_access", (ATTACKER, RSU))).ok


def test_unknown_entity_in_condition(initial):
    with pytest.raises(UnknownIdError):
        eval_condition(initial, Condition("has_system_env", ("OBU_ghost", "USB")))


def test_apply_empty_effect_list_is_identity(initial):
    assert apply_effects(initial, []) == initial
    assert state_diff(initial, apply_effects(initial, [])).empty


def test_add_then_query_fact(initial):
    state = apply_effects(initial, [fact("packets_collected", ATTACKER, RSU)])
    assert eval_condition(state, Condition("fact", ("packets_collected", ATTACKER, RSU))).ok


def test_grant_does_not_downgrade(initial):
    rooted = apply_effects(initial, [grant(ATTACKER, VEHICLE, "root")])
    after = apply_effects(rooted, [grant(ATTACKER, VEHICLE, "user")])
    assert after.privilege_of(ATTACKER, VEHICLE) == "root"


def test_append_command_extends_overlay(initial):
    state = apply_effects(initial, [Effect("append_command", (RSU, "Replay captured frame"))])
    base = initial.command_of(RSU)
    assert state.command_of(RSU) == base + ("Replay captured frame",)
    assert initial.command_of(RSU) == base


def test_set_field_overrides_description(initial):
    state = apply_effects(initial, [Effect("set_field", (VEHICLE, "Description", "Avante"))])
    assert state.description_of(VEHICLE) == "Avante"
    assert initial.description_of(VEHICLE) == "BMW X5"
    assert not eval_condition(state, Condition("model_matches", (VEHICLE, "BMW X"))).ok


def test_set_field_system_env_appends_token(initial):
    state = apply_effects(initial, [Effect("set_field", (RSU, "System_Env", "Busybox"))])
    assert "Busybox" in state.system_env_of(RSU)
    assert set(initial.system_env_of(RSU)) <= set(state.system_env_of(RSU))


def test_set_field_rejects_undeclared_key(initial):
    with pytest.raises(ConditionError):
        apply_effects(initial, [Effect("set_field", (VEHICLE, "Protocol", "CAN"))])


def test_diff_one_privilege_entry(initial):
    after = apply_effects(initial, [grant(ATTACKER, VEHICLE, "root")])
    diff = state_diff(initial, after)
    assert diff.privilege_changes == ((ATTACKER, VEHICLE, "none", "root"),)
    assert not diff.added_facts


def test_diff_of_state_with_itself_is_empty(initial):
    assert state_diff(initial, initial).empty


def test_diff_fact_set_semantics(initial):
    after = apply_effects(initial, [fact("f", ATTACKER), fact("f", ATTACKER)])
    diff = state_diff(initial, after)
    assert diff.added_facts == (("f", ATTACKER),)


def test_diff_requires_same_environment(initial, table_env):
    with pytest.raises(ValueError):
        state_diff(initial, WorldState(env=table_env))


# Randomized property checks -------------------------------------------------

ENTITY_IDS = ("OBU_Vehicle_hyundai", VEHICLE, RSU, ATTACKER)

conditions = st.one_of(
    st.builds(
        Condition,
        kind=st.just("has_privilege"),
        args=st.tuples(
            st.sampled_from(ENTITY_IDS),
            st.sampled_from(ENTITY_IDS),
            st.sampled_from(("none", "user", "root")),
        ),
    ),
    st.builds(
        Condition,
        kind=st.just("fact"),
        args=st.lists(st.sampled_from(ENTITY_IDS + ("f", "g")), min_size=1, max_size=3).map(
            tuple
        ),
    ),
    st.builds(
        Condition,
        kind=st.just("has_system_env"),
        args=st.tuples(st.sampled_from(ENTITY_IDS), st.sampled_from(("USB", "Linux Yocto"))),
    ),
)

effects = st.one_of(
    st.builds(
        Effect,
        kind=st.just("grant_privilege"),
        args=st.tuples(
            st.sampled_from(ENTITY_IDS),
            st.sampled_from(ENTITY_IDS),
            st.sampled_from(("user", "root")),
        ),
    ),
    st.builds(
        Effect,
        kind=st.just("add_fact"),
        args=st.lists(st.sampled_from(ENTITY_IDS + ("f", "g")), min_size=1, max_size=3).map(
            tuple
        ),
    ),
    st.builds(
        Effect,
        kind=st.just("append_command"),
        args=st.tuples(st.sampled_from(ENTITY_IDS), st.sampled_from(("cmd-a", "cmd-b"))),
    ),
)


@given(effect_list=st.lists(effects, max_size=6), cond=conditions)
def test_eval_is_pure(env, effect_list, cond):
    state = apply_effects(WorldState(env=env), effect_list)
    first = eval_condition(state, cond)
    second = eval_condition(state, cond)
    assert first == second


@given(effect_list=st.lists(effects, max_size=6), more=st.lists(effects, max_size=4))
def test_apply_never_mutates_input(env, effect_list, more):
    state = apply_effects(WorldState(env=env), effect_list)
    snapshot = state.canonical_key()
    apply_effects(state, more)
    assert state.canonical_key() == snapshot


@given(effect_list=st.lists(effects, max_size=6))
def test_privilege_monotonicity(env, effect_list):
    state = apply_effects(WorldState(env=env), effect_list)
    order = {"none": 0, "user": 1, "root": 2}
    for actor, entity, level in state.privileges:
        for lower in ("none", "user", "root"):
            if order[lower] <= order[level]:
                assert eval_condition(
                    state, Condition("has_privilege", (actor, entity, lower))
                ).ok


@given(effect_list=st.lists(effects, max_size=6))
def test_fact_idempotence(env, effect_list):
    state = apply_effects(WorldState(env=env), effect_list)
    for added in list(state.facts):
        again = apply_effects(state, [Effect("add_fact", added)])
        assert again == state
