from __future__ import annotations

import itertools
import json

import pytest

from homegate.backends import RuleOracleBackend
from homegate.home_model import load_snapshot
from homegate.router import (
    AnalysisError,
    OperationVerdict,
    Route,
    analysis_from_verdicts,
    build_stage1_prompt,
    derive_route,
    parse_analysis,
    route_instruction,
)
from homegate.sampledata import (
    four_room_home,
    lamp_command_resolvable,
    mixed_command,
    storeroom_command,
    storeroom_home,
    two_lamp_home,
)


def test_prompt_contains_the_three_rules():
    prompt = build_stage1_prompt("Turn on the oven.", load_snapshot(four_room_home()))
    assert "Room existence: Does the mentioned room exist?" in prompt
    assert "Device existence: Does the device exist in that room?" in prompt
    assert "Action support: Does the device support the requested action/attribute?" in prompt
    assert "<home_state>" in prompt and "</home_state>" in prompt
    assert "Turn on the oven." in prompt


def test_prompt_accepts_empty_instruction():
    prompt = build_stage1_prompt("", load_snapshot(four_room_home()))
    assert prompt.endswith("<User instructions:>\n")


def test_prompt_is_deterministic():
    state = load_snapshot(four_room_home())
    assert build_stage1_prompt("x", state) == build_stage1_prompt("x", state)


def test_parse_analysis_mixed():
    payload = {
        "operations": [
            {"valid": True, "reason": "lamp exists"},
            {"valid": False, "reason": "no dehumidifier in kitchen"},
            {"valid": True, "reason": "lock exists"},
        ],
        "all_valid": False,
    }
    analysis = parse_analysis(json.dumps(payload))
    assert analysis.route is Route.MIXED
    assert analysis.all_valid is False
    assert "no dehumidifier in kitchen" in analysis.reasoning


def test_parse_analysis_all_valid():
    payload = {"operations": [{"valid": True, "reason": "ok"}], "all_valid": True}
    analysis = parse_analysis(json.dumps(payload))
    assert analysis.route is Route.VALID
    assert analysis.all_valid is True


def test_parse_analysis_invalid_single():
    payload = {"operations": [{"valid": False, "reason": "no store room"}], "all_valid": False}
    analysis = parse_analysis(json.dumps(payload))
    assert analysis.route is Route.INVALID


def test_parse_analysis_overrides_inconsistent_all_valid():
    payload = {"operations": [{"valid": False, "reason": "missing"}], "all_valid": True}
    analysis = parse_analysis(json.dumps(payload))
    assert analysis.route is Route.INVALID
    assert analysis.all_valid is False


def test_parse_analysis_tolerates_surrounding_prose_and_unknown_fields():
    text = 'Sure thing.\n{"operations": [{"valid": true, "reason": "ok", "confidence": 0.9}], "all_valid": true, "extra": 1}\nDone.'
    analysis = parse_analysis(text)
    assert analysis.route is Route.VALID


def test_parse_analysis_no_json_raises():
    with pytest.raises(AnalysisError, match="unparseable stage-1 output"):
        parse_analysis("I think the lamp exists.")


def test_route_derivation_exhaustive():
    # Every combination of (valid, ambiguous) across verdict lists up to
    # length four must map to exactly one route and satisfy the invariants.
    flavors = [(True, False), (True, True), (False, False), (False, True)]
    for length in range(0, 5):
        for combo in itertools.product(flavors, repeat=length):
            verdicts = [
                OperationVerdict(description="", valid=v, ambiguous=a, reason="r")
                for v, a in combo
            ]
            route = derive_route(verdicts)
            has_valid = any(v.valid for v in verdicts)
            has_invalid = any(not v.valid for v in verdicts)
            has_ambiguous = any(v.ambiguous for v in verdicts)
            if verdicts and has_valid and not has_invalid and not has_ambiguous:
                assert route is Route.VALID
            if verdicts and not has_valid:
                assert route is Route.INVALID
            if has_valid and has_invalid:
                assert route is Route.MIXED
            if has_ambiguous and not has_invalid and verdicts:
                assert route is Route.AMBIGUOUS
            analysis = analysis_from_verdicts(verdicts)
            assert analysis.all_valid == (route is Route.VALID)


def test_route_instruction_invalid_store_room():
    home = load_snapshot(storeroom_home())
    analysis, usage = route_instruction(storeroom_command(), home, RuleOracleBackend())
    assert analysis.route is Route.INVALID
    assert usage.total > 0
    assert usage.reported is False


def test_route_instruction_mixed_flags_dehumidifier():
    home = load_snapshot(four_room_home())
    analysis, _ = route_instruction(mixed_command(), home, RuleOracleBackend())
    assert analysis.route is Route.MIXED
    flagged = [op for op in analysis.operations if not op.valid]
    assert len(flagged) == 1
    assert "dehumidifier" in flagged[0].reason


def test_route_instruction_state_based_disambiguation():
    home = load_snapshot(two_lamp_home("ON", "OFF"))
    analysis, _ = route_instruction(lamp_command_resolvable(), home, RuleOracleBackend())
    assert analysis.route is Route.VALID
    assert "lamp_b" in analysis.operations[0].description


def test_route_matches_task_category_corpus_wide():
    from homegate.bench import generate_corpus

    corpus = generate_corpus(
        300,
        seed=51,
        mix={"VS": 0.2, "IS": 0.2, "VM": 0.2, "IM": 0.2, "MM": 0.2},
    )
    expected = {
        "VS": Route.VALID,
        "VM": Route.VALID,
        "IS": Route.INVALID,
        "IM": Route.INVALID,
        "MM": Route.MIXED,
    }
    backend = RuleOracleBackend()
    for task in corpus.tasks:
        home = load_snapshot(corpus.home_document(task))
        analysis, _ = route_instruction(task.instruction, home, backend)
        assert analysis.route is expected[task.category], task.task_id


class _GarbageBackend:
    def complete(self, prompt):
        from homegate.backends import CompletionResult, TokenUsage

        return CompletionResult(text="no json here", usage=TokenUsage(1, 1, False))


def test_route_instruction_fail_safe_on_unparseable_output():
    home = load_snapshot(four_room_home())
    analysis, _ = route_instruction("anything", home, _GarbageBackend())
    assert analysis.route is Route.INVALID
    assert analysis.route is not Route.VALID
