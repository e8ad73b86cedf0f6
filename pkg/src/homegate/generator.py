"""Stage 2: constraint-aware prompt construction and candidate generation.

The prompt injects the flattened device status, a methods-only block, few-
shot demonstrations, and the stage-1 diagnostic notes, then asks for a
single machine-instruction block.  The raw candidate sequence comes back
unfiltered; grounding enforcement happens downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .actions import ActionSequence, SequenceParseError, parse_sequence
from .backends import (
    ANALYSIS_BLOCK_HEADER,
    STAGE2_SENTINEL,
    CompletionResult,
    TokenUsage,
)
from .home_model import HomeState, render_methods_text, render_state_text

STAGE2_HEADER = (
    STAGE2_SENTINEL
    + " Complete the following task as instructed or answer the following question"
    " with the information provided only.\n"
    "The current status of the device and the methods it possesses are provided below,"
    " please only use the methods provided.\n"
    'Output "error_input" when operating non-existent attributes and devices.'
    " Only output machine instructions and enclose them in {}."
)

STAGE2_STATE_LEAD = (
    "The following provides the status of all devices in each room of the current"
    " household, the adjustable attributes..."
)
STAGE2_METHODS_LEAD = (
    "The following provides the methods to control each device in the current household:"
)
USER_BLOCK_LEAD = "Here are the user instructions you need to reply to."


class GenerationParseError(ValueError):
    """Model output had no instruction block; carries the usage already spent."""

    def __init__(self, message: str, usage: TokenUsage) -> None:
        super().__init__(message)
        self.usage = usage


@dataclass(frozen=True)
class FewShotExample:
    instruction: str
    gold_output: str  # must parse as a machine-instruction block


@dataclass(frozen=True)
class GenerationRequest:
    instruction: str
    state: HomeState
    stage1_reasoning: str = ""
    examples: tuple[FewShotExample, ...] = field(default=())


# One demonstration per shape the generator must master: a single command,
# an impossible command, a multi-step command, and a mixed one.
DEFAULT_FEW_SHOT: tuple[FewShotExample, ...] = (
    FewShotExample(
        instruction="Turn on the light in the kitchen.",
        gold_output="{kitchen.light.turn_on()}",
    ),
    FewShotExample(
        instruction="Turn on the sauna in the basement.",
        gold_output="{error_input}",
    ),
    FewShotExample(
        instruction="Turn on the light in the kitchen and open the curtain in the bedroom.",
        gold_output="{kitchen.light.turn_on(), bedroom.curtain.open()}",
    ),
    FewShotExample(
        instruction="Turn on the light in the kitchen and start the jacuzzi in the garden.",
        gold_output="{kitchen.light.turn_on(), error_input}",
    ),
)


def build_stage2_prompt(req: GenerationRequest) -> str:
    parts = [
        STAGE2_HEADER,
        "",
        "<home_state>",
        STAGE2_STATE_LEAD,
        render_state_text(req.state),
        "</home_state>",
        "",
        "<device_method>",
        STAGE2_METHODS_LEAD,
        render_methods_text(req.state),
        "</device_method>",
    ]
    if req.examples:
        parts.append("")
        parts.append("Here are some examples.")
        for example in req.examples:
            parts.append("<User instructions:>")
            parts.append(example.instruction)
            parts.append("<Machine instructions:>")
            parts.append(example.gold_output)
    if req.stage1_reasoning:
        parts.append("")
        parts.append(ANALYSIS_BLOCK_HEADER)
        parts.append(req.stage1_reasoning)
    parts.extend(
        [
            "",
            "-------------------------------",
            USER_BLOCK_LEAD,
            "<User instructions:>",
            req.instruction,
            "<Machine instructions:>",
        ]
    )
    return "\n".join(parts)


def generate_candidates(req: GenerationRequest, backend: Any) -> tuple[ActionSequence, TokenUsage]:
    """One stage-2 model call parsed into the raw (pre-filter) sequence.

    Raises the parse error upward when the output has no instruction block;
    the orchestrator turns that into a failed task.
    """
    prompt = build_stage2_prompt(req)
    result: CompletionResult = backend.complete(prompt)
    try:
        return parse_sequence(result.text), result.usage
    except SequenceParseError as exc:
        raise GenerationParseError(str(exc), result.usage) from None
