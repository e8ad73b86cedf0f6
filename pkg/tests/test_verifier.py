from __future__ import annotations

import random

import pytest

from homegate.actions import Call, ERROR_TOKEN, parse_sequence
from homegate.home_model import load_snapshot
from homegate.sampledata import four_room_home, storeroom_home
from homegate.verifier import (
    filter_sequence,
    verify_action,
    verify_capability,
    verify_device,
    verify_room,
)

from conftest import oracle_grounded, random_action, random_home_document

LAMP_CALL = Call("bedroom", "reading_lamp", "turn_on")
DEHUM_CALL = Call("kitchen", "dehumidifier", "set_humidity", (50,))
LOCK_CALL = Call("entrance", "smart_lock", "lock")


@pytest.fixture
def demo_home():
    return load_snapshot(four_room_home())


def test_verify_room(demo_home):
    assert verify_room(LAMP_CALL, demo_home)
    assert not verify_room(Call("store_room", "dehumidifiers", "set_intensity", (0,)), demo_home)
    empty = load_snapshot({"home_id": "e", "rooms": {}, "catalog": []})
    assert not verify_room(LAMP_CALL, empty)
    with pytest.raises(ValueError):
        verify_room(ERROR_TOKEN, demo_home)


def test_verify_device(demo_home):
    assert verify_device(LOCK_CALL, demo_home)
    assert not verify_device(DEHUM_CALL, demo_home)
    # a device that exists, but in a different room than named
    assert not verify_device(Call("kitchen", "smart_lock", "lock"), demo_home)
    with pytest.raises(ValueError):
        verify_device(ERROR_TOKEN, demo_home)


def test_verify_capability(demo_home):
    assert verify_capability(LAMP_CALL, demo_home)
    assert not verify_capability(Call("bedroom", "reading_lamp", "set_temperature", (20,)), demo_home)
    with pytest.raises(ValueError):
        verify_capability(DEHUM_CALL, demo_home)  # device check must come first


def test_verify_capability_parameter_ranges():
    home = load_snapshot(storeroom_home())
    good = Call("study_room", "dehumidifiers", "set_intensity", (0,))
    bad = Call("study_room", "dehumidifiers", "set_intensity", (9,))
    assert verify_capability(good, home)
    assert not verify_capability(bad, home)
    assert verify_action(bad, home).failure_reason == (
        "bad_params:study_room.dehumidifiers.set_intensity"
    )


def test_verify_action_cascade(demo_home):
    result = verify_action(DEHUM_CALL, demo_home)
    assert result.level_room is True
    assert result.level_device is False
    assert result.level_capability is False
    assert result.passed is False
    assert result.failure_reason == "missing_device:kitchen.dehumidifier"

    ok = verify_action(LOCK_CALL, demo_home)
    assert ok.passed is True
    assert ok.failure_reason is None

    err = verify_action(ERROR_TOKEN, demo_home)
    assert err.passed is False
    assert err.failure_reason == "error_token"


def test_verify_action_short_circuit(demo_home):
    result = verify_action(Call("garage", "smart_lock", "lock"), demo_home)
    assert (result.level_room, result.level_device, result.level_capability) == (
        False,
        False,
        False,
    )
    assert result.failure_reason == "missing_room:garage"


def test_filter_sequence_demo_case(demo_home):
    raw = (LAMP_CALL, DEHUM_CALL, LOCK_CALL)
    outcome = filter_sequence(raw, demo_home)
    assert outcome.final == (LAMP_CALL, ERROR_TOKEN, LOCK_CALL)
    assert outcome.error_set == frozenset({"dehumidifier"})
    assert len(outcome.results) == 3


def test_filter_sequence_identity_when_all_valid(demo_home):
    raw = (LAMP_CALL, LOCK_CALL)
    outcome = filter_sequence(raw, demo_home)
    assert outcome.final == raw
    assert outcome.error_set == frozenset()


def test_filter_sequence_all_absent_rooms(demo_home):
    raw = parse_sequence(
        "{atlantis.lamp.turn_on(), nowhere.oven.turn_off(), void.fan.set_speed(1)}"
    )
    outcome = filter_sequence(raw, demo_home)
    assert outcome.final == (ERROR_TOKEN, ERROR_TOKEN, ERROR_TOKEN)
    assert outcome.error_set == frozenset({"lamp", "oven", "fan"})


def test_equivalence_with_brute_force_oracle(rng: random.Random):
    disagreements = 0
    for _ in range(150):
        document = random_home_document(rng)
        home = load_snapshot(document)
        for _ in range(40):
            action = random_action(document, rng)
            expected = oracle_grounded(document, action)
            if verify_action(action, home).passed != expected:
                disagreements += 1
    assert disagreements == 0


def test_filter_soundness_completeness_alignment(rng: random.Random):
    for _ in range(80):
        document = random_home_document(rng)
        home = load_snapshot(document)
        raw = tuple(random_action(document, rng) for _ in range(rng.randint(0, 6)))
        outcome = filter_sequence(raw, home)
        assert len(outcome.final) == len(raw)
        for index, (before, after) in enumerate(zip(raw, outcome.final)):
            if isinstance(after, Call):
                # soundness: everything kept is grounded, unchanged, in place
                assert oracle_grounded(document, after)
                assert after == before
            if oracle_grounded(document, before):
                # completeness: grounded inputs survive at their index
                assert outcome.final[index] == before


def test_monotonicity_adding_device_never_breaks_passing_actions(rng: random.Random):
    for _ in range(40):
        document = random_home_document(rng)
        home = load_snapshot(document)
        actions = [random_action(document, rng) for _ in range(20)]
        passing = [a for a in actions if verify_action(a, home).passed]
        grown = {
            "home_id": document["home_id"],
            "catalog": list(document["catalog"]),
            "rooms": {
                room: dict(devices) for room, devices in document["rooms"].items()
            },
        }
        target_room = next(iter(grown["rooms"]), None)
        if target_room is None:
            continue
        grown["rooms"][target_room]["brand_new_device"] = {
            "type": document["catalog"][0],
            "attributes": {"power": "OFF"},
            "methods": [{"name": "turn_on", "params": [], "writes": {"power": "ON"}}],
        }
        grown_home = load_snapshot(grown)
        for action in passing:
            assert verify_action(action, grown_home).passed
