"""Stage 1: classify an instruction against the home before anything runs.

The router asks the model to judge each sub-operation against the current
snapshot and derives a route from the verdicts: fully executable, fully
impossible (rejected before generation), a mix of both, or ambiguous enough
to need the user.  Unparseable model output fails safe to the rejected
route so nothing unreviewed ever reaches generation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any, Sequence

from .backends import STAGE1_SENTINEL, CompletionResult, TokenUsage
from .home_model import HomeState, render_state_text

STAGE1_TEMPLATE = STAGE1_SENTINEL + """ Your task is to strictly evaluate if the user's command can be executed based on the provided environment state.

<home_state>
{state}
</home_state>

Check these THREE things for each operation:
1. Room existence: Does the mentioned room exist?
2. Device existence: Does the device exist in that room?
3. Action support: Does the device support the requested action/attribute?

Output a JSON object containing an array of "operations" (with "valid" and "reason" fields) and a global "all_valid" boolean flag.

Here are the user instructions you need to analyze.
<User instructions:>
{instruction}"""


class Route(str, Enum):
    VALID = "valid"
    INVALID = "invalid"
    MIXED = "mixed"
    AMBIGUOUS = "ambiguous"


class AnalysisError(ValueError):
    """Stage-1 output carried no usable JSON analysis."""


@dataclass(frozen=True)
class OperationVerdict:
    description: str
    valid: bool
    ambiguous: bool = False
    reason: str = ""
    candidates: tuple[str, ...] = ()  # room.device options when ambiguous


@dataclass(frozen=True)
class IntentAnalysis:
    route: Route
    operations: tuple[OperationVerdict, ...]
    reasoning: str
    all_valid: bool

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "route": self.route.value,
            "operations": [
                {
                    "description": op.description,
                    "valid": op.valid,
                    "ambiguous": op.ambiguous,
                    "reason": op.reason,
                    "candidates": list(op.candidates),
                }
                for op in self.operations
            ],
            "reasoning": self.reasoning,
            "all_valid": self.all_valid,
        }


def derive_route(verdicts: Sequence[OperationVerdict]) -> Route:
    """Route as a pure function of the verdict list (fail-safe when empty)."""
    if not verdicts:
        return Route.INVALID
    has_valid = any(v.valid for v in verdicts)
    has_invalid = any(not v.valid for v in verdicts)
    has_ambiguous = any(v.ambiguous for v in verdicts)
    if has_invalid and has_valid:
        return Route.MIXED
    if has_invalid:
        return Route.INVALID
    if has_ambiguous:
        return Route.AMBIGUOUS
    return Route.VALID


def analysis_from_verdicts(verdicts: Sequence[OperationVerdict]) -> IntentAnalysis:
    route = derive_route(verdicts)
    reasoning = "; ".join(v.reason for v in verdicts if v.reason)
    return IntentAnalysis(
        route=route,
        operations=tuple(verdicts),
        reasoning=reasoning,
        all_valid=route is Route.VALID,
    )


def build_stage1_prompt(instruction: str, state: HomeState) -> str:
    return STAGE1_TEMPLATE.format(state=render_state_text(state), instruction=instruction)


def parse_analysis(output: str) -> IntentAnalysis:
    """Pull the first JSON object out of model output and derive the route.

    The model's own ``all_valid`` flag is advisory; the route derived from
    the verdicts is what counts.
    """
    payload = _first_json_object(output)
    if payload is None:
        raise AnalysisError("unparseable stage-1 output")
    raw_ops = payload.get("operations")
    if not isinstance(raw_ops, list):
        raise AnalysisError("unparseable stage-1 output: no operations array")
    verdicts = []
    for raw in raw_ops:
        if not isinstance(raw, dict) or not isinstance(raw.get("valid"), bool):
            raise AnalysisError("unparseable stage-1 output: bad operation entry")
        verdicts.append(
            OperationVerdict(
                description=str(raw.get("description", "")),
                valid=raw["valid"],
                ambiguous=bool(raw.get("ambiguous", False)),
                reason=str(raw.get("reason", "")),
                candidates=tuple(str(c) for c in raw.get("candidates", ())),
            )
        )
    return analysis_from_verdicts(verdicts)


def fail_safe_analysis(reason: str) -> IntentAnalysis:
    """The rejected-route analysis used when stage-1 output cannot be trusted."""
    return IntentAnalysis(
        route=Route.INVALID,
        operations=(OperationVerdict(description="", valid=False, reason=reason),),
        reasoning=reason,
        all_valid=False,
    )


def route_instruction(
    instruction: str, state: HomeState, backend: Any
) -> tuple[IntentAnalysis, TokenUsage]:
    """One stage-1 model call; parse failures degrade to the rejected route."""
    prompt = build_stage1_prompt(instruction, state)
    result: CompletionResult = backend.complete(prompt)
    try:
        analysis = parse_analysis(result.text)
    except AnalysisError as exc:
        analysis = fail_safe_analysis(str(exc))
    return analysis, result.usage


def _first_json_object(text: str) -> dict[str, Any] | None:
    decoder = json.JSONDecoder()
    start = text.find("{")
    while start != -1:
        try:
            value, _ = decoder.raw_decode(text[start:])
        except json.JSONDecodeError:
            start = text.find("{", start + 1)
            continue
        if isinstance(value, dict):
            return value
        start = text.find("{", start + 1)
    return None
