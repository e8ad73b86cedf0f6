from __future__ import annotations

import pytest

from homegate.actions import ERROR_TOKEN, Call, render_sequence
from homegate.backends import RuleOracleBackend, embed_intent
from homegate.home_model import load_snapshot, lookup_device
from homegate.pipeline import (
    Outcome,
    Pipeline,
    Session,
    build_feedback,
)
from homegate.sampledata import (
    four_room_home,
    lamp_command_ambiguous,
    lamp_command_resolvable,
    mixed_command,
    storeroom_command,
    storeroom_home,
    two_lamp_home,
)
from homegate.verifier import FilterOutcome, filter_sequence


def _pipeline(**kwargs) -> Pipeline:
    return Pipeline(RuleOracleBackend(), RuleOracleBackend(), **kwargs)


def test_mixed_instruction_executes_filtered_sequence():
    session = Session(home=load_snapshot(four_room_home()))
    result = _pipeline().execute_instruction(session, mixed_command())
    assert result.outcome is Outcome.EXECUTED
    assert result.final == (
        Call("bedroom", "reading_lamp", "turn_on"),
        ERROR_TOKEN,
        Call("entrance", "smart_lock", "lock"),
    )
    assert result.feedback == "Executed valid actions. Failed: dehumidifier"
    assert lookup_device(session.home, "bedroom", "reading_lamp").attributes["power"] == "ON"
    assert (
        lookup_device(session.home, "entrance", "smart_lock").attributes["lock_state"]
        == "LOCKED"
    )
    assert session.home.timestamp == 2  # two applied actions
    assert result.usage.stage1_calls == 1
    assert result.usage.stage2_calls == 1
    assert result.verification is not None and len(result.verification) == 3


def test_invalid_instruction_rejected_without_generation():
    session = Session(home=load_snapshot(storeroom_home()))
    result = _pipeline().execute_instruction(session, storeroom_command())
    assert result.outcome is Outcome.REJECTED
    assert render_sequence(result.final) == "{error_input}"
    assert result.feedback == "Operation rejected: No valid device."
    assert result.usage.stage2_calls == 0
    assert session.home.timestamp == 0  # no mutation


def test_state_resolvable_reference_executes_without_clarification():
    session = Session(home=load_snapshot(two_lamp_home("ON", "OFF")))
    result = _pipeline().execute_instruction(session, lamp_command_resolvable())
    assert result.outcome is Outcome.EXECUTED
    assert result.final == (Call("bedroom", "lamp_b", "turn_on"),)
    assert result.question is None


def test_ambiguous_reference_asks_and_resumes():
    pipeline = _pipeline()
    session = Session(home=load_snapshot(two_lamp_home("OFF", "OFF")))
    asked = pipeline.execute_instruction(session, lamp_command_ambiguous())
    assert asked.outcome is Outcome.CLARIFICATION_NEEDED
    assert asked.question == "Which lamp? Options: bedroom.lamp_a, bedroom.lamp_b"
    assert asked.options == ("bedroom.lamp_a", "bedroom.lamp_b")
    assert session.home.timestamp == 0
    assert session.pending_clarification is not None

    answered = pipeline.answer_clarification(session, "bedroom.lamp_a")
    assert answered.outcome is Outcome.EXECUTED
    assert answered.final == (Call("bedroom", "lamp_a", "turn_on"),)
    assert session.pending_clarification is None
    assert lookup_device(session.home, "bedroom", "lamp_a").attributes["power"] == "ON"


def test_empty_clarification_answer_reasks():
    pipeline = _pipeline()
    session = Session(home=load_snapshot(two_lamp_home("OFF", "OFF")))
    pipeline.execute_instruction(session, lamp_command_ambiguous())
    again = pipeline.answer_clarification(session, "")
    assert again.outcome is Outcome.CLARIFICATION_NEEDED
    assert session.pending_clarification is not None


def test_clarification_answer_naming_absent_device_is_rejected():
    pipeline = _pipeline()
    session = Session(home=load_snapshot(two_lamp_home("OFF", "OFF")))
    pipeline.execute_instruction(session, lamp_command_ambiguous())
    result = pipeline.answer_clarification(session, "the garage one")
    assert result.outcome is Outcome.REJECTED
    assert render_sequence(result.final) == "{error_input}"


def test_instruction_blocked_while_clarification_pending():
    pipeline = _pipeline()
    session = Session(home=load_snapshot(two_lamp_home("OFF", "OFF")))
    pipeline.execute_instruction(session, lamp_command_ambiguous())
    with pytest.raises(ValueError, match="pending clarification"):
        pipeline.execute_instruction(session, "anything else")


def test_answer_without_pending_clarification_is_a_contract_error():
    session = Session(home=load_snapshot(four_room_home()))
    with pytest.raises(ValueError, match="no pending clarification"):
        _pipeline().answer_clarification(session, "whatever")


def test_build_feedback():
    home = load_snapshot(four_room_home())
    ok = filter_sequence((Call("entrance", "smart_lock", "lock"),), home)
    assert build_feedback(ok) == "Success."
    failed = FilterOutcome(final=(), results=(), error_set=frozenset({"b", "a"}))
    assert build_feedback(failed) == "Executed valid actions. Failed: a, b"
    single = FilterOutcome(final=(), results=(), error_set=frozenset({"dehumidifier"}))
    assert build_feedback(single) == "Executed valid actions. Failed: dehumidifier"


def test_generation_failure_is_a_failed_outcome():
    class NoBlockBackend:
        def complete(self, prompt):
            from homegate.backends import CompletionResult, TokenUsage

            return CompletionResult(text="cannot comply", usage=TokenUsage(5, 2, False))

    instruction = embed_intent(
        "Turn on the lamp in the bedroom.",
        {
            "ops": [
                {
                    "desc": "turn_on bedroom.reading_lamp",
                    "valid": True,
                    "reason": "exists",
                    "call": "bedroom.reading_lamp.turn_on()",
                }
            ]
        },
    )
    pipeline = Pipeline(RuleOracleBackend(), NoBlockBackend())
    session = Session(home=load_snapshot(four_room_home()))
    result = pipeline.execute_instruction(session, instruction)
    assert result.outcome is Outcome.FAILED
    assert result.feedback == "generation failed"
    assert result.usage.stage2_calls == 1  # the call happened, its tokens count
    assert session.home.timestamp == 0


def test_stage1_backend_error_fails_without_mutation():
    class BrokenBackend:
        def complete(self, prompt):
            from homegate.backends import BackendError

            raise BackendError("connection refused")

    pipeline = Pipeline(BrokenBackend(), RuleOracleBackend())
    session = Session(home=load_snapshot(four_room_home()))
    result = pipeline.execute_instruction(session, mixed_command())
    assert result.outcome is Outcome.FAILED
    assert "connection refused" in result.failure_cause
    assert result.usage.stage1_calls == 0
    assert session.home.timestamp == 0


def test_stage1_disabled_sends_everything_to_generation():
    pipeline = Pipeline(RuleOracleBackend(), RuleOracleBackend(), stage1_enabled=False)
    session = Session(home=load_snapshot(storeroom_home()))
    result = pipeline.execute_instruction(session, storeroom_command())
    assert result.outcome is Outcome.EXECUTED
    assert result.usage.stage1_calls == 0
    assert result.usage.stage2_calls == 1
    assert result.analysis is None


def test_usage_tallies_accumulate_globally_and_per_session():
    pipeline = _pipeline()
    session = Session(home=load_snapshot(four_room_home()))
    pipeline.execute_instruction(session, mixed_command())
    pipeline.execute_instruction(session, mixed_command())
    assert session.usage.stage1_calls == 2
    assert pipeline.tally.snapshot().stage1_calls == 2
    other = Session(home=load_snapshot(storeroom_home()))
    pipeline.execute_instruction(other, storeroom_command())
    assert pipeline.tally.snapshot().stage1_calls == 3
    assert pipeline.tally.snapshot().stage2_calls == 2


def test_history_is_append_only_record_of_results():
    pipeline = _pipeline()
    session = Session(home=load_snapshot(four_room_home()))
    pipeline.execute_instruction(session, mixed_command())
    pipeline.execute_instruction(session, mixed_command())
    assert len(session.history) == 2
    assert all(isinstance(entry[0], str) for entry in session.history)


def test_event_sink_receives_ordered_kinds():
    events: list[str] = []
    pipeline = _pipeline()
    session = Session(home=load_snapshot(four_room_home()))
    pipeline.execute_instruction(
        session, mixed_command(), event_sink=lambda kind, payload: events.append(kind)
    )
    assert events[0] == "analysis"
    assert events[1] == "verification"
    assert events.count("executed") == 2
    assert events[-1] == "feedback"


def test_result_serializes_to_json_dict():
    session = Session(home=load_snapshot(storeroom_home()))
    result = _pipeline().execute_instruction(session, storeroom_command())
    payload = result.to_json_dict()
    assert payload["outcome"] == "rejected"
    assert payload["final"] == "{error_input}"
    assert payload["usage"]["stage2_calls"] == 0
    assert payload["analysis"]["route"] == "invalid"
