"""End-to-end orchestration: route, reject or clarify, generate, filter, run.

One instruction flows through stage 1 (routing), then either stops (early
rejection, clarification request) or continues through stage 2 (candidate
generation), the grounding filter, and sequential execution of the
surviving actions.  Per-stage call and token accounting rides along.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from .actions import ERROR_TOKEN, ActionSequence, Call, render_sequence
from .backends import BackendError, TokenUsage
from .generator import (
    DEFAULT_FEW_SHOT,
    FewShotExample,
    GenerationParseError,
    GenerationRequest,
    generate_candidates,
)
from .home_model import HomeState, apply_action, lookup_device
from .router import IntentAnalysis, Route, route_instruction
from .verifier import FilterOutcome, VerificationResult, filter_sequence

EventSink = Callable[[str, dict], None]

REJECTION_FEEDBACK = "Operation rejected: No valid device."
GENERATION_FAILED_FEEDBACK = "generation failed"
CLARIFICATION_MARKER = "User clarified:"


class Outcome(str, Enum):
    EXECUTED = "executed"
    REJECTED = "rejected"
    CLARIFICATION_NEEDED = "clarification_needed"
    FAILED = "failed"


@dataclass
class StageUsage:
    stage1_calls: int = 0
    stage1_tokens: int = 0
    stage2_calls: int = 0
    stage2_tokens: int = 0

    def add_stage1(self, usage: TokenUsage) -> None:
        self.stage1_calls += 1
        self.stage1_tokens += usage.total

    def add_stage2(self, usage: TokenUsage) -> None:
        self.stage2_calls += 1
        self.stage2_tokens += usage.total

    def merge(self, other: "StageUsage") -> None:
        self.stage1_calls += other.stage1_calls
        self.stage1_tokens += other.stage1_tokens
        self.stage2_calls += other.stage2_calls
        self.stage2_tokens += other.stage2_tokens

    def to_json_dict(self) -> dict[str, int]:
        return {
            "stage1_calls": self.stage1_calls,
            "stage1_tokens": self.stage1_tokens,
            "stage2_calls": self.stage2_calls,
            "stage2_tokens": self.stage2_tokens,
        }


class UsageTally:
    """Thread-safe accumulator for per-stage call/token totals."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._usage = StageUsage()

    def merge(self, usage: StageUsage) -> None:
        with self._lock:
            self._usage.merge(usage)

    def snapshot(self) -> StageUsage:
        with self._lock:
            return StageUsage(**self._usage.to_json_dict())


@dataclass(frozen=True)
class PipelineResult:
    outcome: Outcome
    final: ActionSequence
    feedback: str
    analysis: IntentAnalysis | None
    usage: StageUsage
    state_version: int
    question: str | None = None
    options: tuple[str, ...] = ()
    failure_cause: str | None = None
    verification: tuple[VerificationResult, ...] | None = None

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "final": render_sequence(self.final),
            "feedback": self.feedback,
            "question": self.question,
            "options": list(self.options),
            "failure_cause": self.failure_cause,
            "analysis": self.analysis.to_json_dict() if self.analysis else None,
            "verification": [
                {
                    "action": str(r.action),
                    "passed": r.passed,
                    "failure_reason": r.failure_reason,
                }
                for r in self.verification
            ]
            if self.verification is not None
            else None,
            "usage": self.usage.to_json_dict(),
            "state_version": self.state_version,
        }


@dataclass
class PendingClarification:
    instruction: str
    question: str
    analysis: IntentAnalysis


_session_counter = itertools.count(1)


@dataclass
class Session:
    """One user's conversation against one home; instructions run serialized."""

    home: HomeState
    id: str = ""
    pending_clarification: PendingClarification | None = None
    history: list[tuple[str, PipelineResult]] = field(default_factory=list)
    usage: StageUsage = field(default_factory=StageUsage)
    lock: threading.RLock = field(default_factory=threading.RLock)

    def __post_init__(self) -> None:
        if not self.id:
            self.id = f"session-{next(_session_counter)}"


def build_feedback(outcome: FilterOutcome) -> str:
    """Tell the user exactly which device commands were bypassed, if any."""
    if not outcome.error_set:
        return "Success."
    return "Executed valid actions. Failed: " + ", ".join(sorted(outcome.error_set))


class Pipeline:
    """Holds the stage backends plus global accounting across sessions."""

    def __init__(
        self,
        stage1_backend: Any,
        stage2_backend: Any,
        *,
        few_shot: tuple[FewShotExample, ...] = DEFAULT_FEW_SHOT,
        stage1_enabled: bool = True,
        event_sink: EventSink | None = None,
    ) -> None:
        self.stage1_backend = stage1_backend
        self.stage2_backend = stage2_backend
        self.few_shot = few_shot
        self.stage1_enabled = stage1_enabled
        self.event_sink = event_sink
        self.tally = UsageTally()

    def execute_instruction(
        self, session: Session, instruction: str, *, event_sink: EventSink | None = None
    ) -> PipelineResult:
        sink = event_sink or self.event_sink
        with session.lock:
            if session.pending_clarification is not None:
                raise ValueError("pending clarification must be answered first")
            result = self._run(session, instruction, sink)
            session.history.append((instruction, result))
            session.usage.merge(result.usage)
            self.tally.merge(result.usage)
            return result

    def answer_clarification(
        self, session: Session, answer: str, *, event_sink: EventSink | None = None
    ) -> PipelineResult:
        """Resume an interrupted instruction; the firewall re-applies in full."""
        with session.lock:
            pending = session.pending_clarification
            if pending is None:
                raise ValueError("no pending clarification to answer")
            session.pending_clarification = None
            augmented = f"{pending.instruction}\n{CLARIFICATION_MARKER} {answer}"
            return self.execute_instruction(session, augmented, event_sink=event_sink)

    def _run(self, session: Session, instruction: str, sink: EventSink | None) -> PipelineResult:
        usage = StageUsage()
        analysis: IntentAnalysis | None = None

        if self.stage1_enabled:
            try:
                analysis, stage1_usage = route_instruction(
                    instruction, session.home, self.stage1_backend
                )
            except BackendError as exc:
                return self._failed(session, f"stage-1 backend error: {exc}", None, usage, sink)
            usage.add_stage1(stage1_usage)
            self._emit(sink, "analysis", analysis.to_json_dict())

            if analysis.route is Route.INVALID:
                final: ActionSequence = (ERROR_TOKEN,)
                self._emit(
                    sink,
                    "rejected",
                    {"feedback": REJECTION_FEEDBACK, "final": render_sequence(final)},
                )
                return PipelineResult(
                    outcome=Outcome.REJECTED,
                    final=final,
                    feedback=REJECTION_FEEDBACK,
                    analysis=analysis,
                    usage=usage,
                    state_version=session.home.timestamp,
                )

            if analysis.route is Route.AMBIGUOUS:
                question, options = _clarification_question(analysis, session.home)
                session.pending_clarification = PendingClarification(
                    instruction=instruction, question=question, analysis=analysis
                )
                self._emit(
                    sink,
                    "clarification_request",
                    {"question": question, "options": list(options)},
                )
                return PipelineResult(
                    outcome=Outcome.CLARIFICATION_NEEDED,
                    final=(),
                    feedback=question,
                    analysis=analysis,
                    usage=usage,
                    state_version=session.home.timestamp,
                    question=question,
                    options=options,
                )

        request = GenerationRequest(
            instruction=instruction,
            state=session.home,
            stage1_reasoning=analysis.reasoning if analysis else "",
            examples=self.few_shot,
        )
        try:
            raw, stage2_usage = generate_candidates(request, self.stage2_backend)
        except GenerationParseError as exc:
            usage.add_stage2(exc.usage)
            return self._failed(session, GENERATION_FAILED_FEEDBACK, analysis, usage, sink)
        except BackendError as exc:
            return self._failed(
                session, f"stage-2 backend error: {exc}", analysis, usage, sink
            )
        usage.add_stage2(stage2_usage)

        outcome = filter_sequence(raw, session.home)
        self._emit(
            sink,
            "verification",
            {
                "results": [
                    {
                        "action": str(r.action),
                        "passed": r.passed,
                        "failure_reason": r.failure_reason,
                    }
                    for r in outcome.results
                ]
            },
        )

        for action in outcome.final:
            if not isinstance(action, Call):
                continue
            session.home = apply_action(session.home, action)
            device = lookup_device(session.home, action.room, action.device)
            self._emit(
                sink,
                "executed",
                {
                    "action": str(action),
                    "room": action.room,
                    "device": action.device,
                    "attributes": dict(device.attributes) if device else {},
                    "state_version": session.home.timestamp,
                },
            )

        feedback = build_feedback(outcome)
        self._emit(
            sink,
            "feedback",
            {
                "message": feedback,
                "error_set": sorted(outcome.error_set),
                "final": render_sequence(outcome.final),
            },
        )
        return PipelineResult(
            outcome=Outcome.EXECUTED,
            final=outcome.final,
            feedback=feedback,
            analysis=analysis,
            usage=usage,
            state_version=session.home.timestamp,
            verification=outcome.results,
        )

    def _failed(
        self,
        session: Session,
        cause: str,
        analysis: IntentAnalysis | None,
        usage: StageUsage,
        sink: EventSink | None,
    ) -> PipelineResult:
        self._emit(sink, "feedback", {"message": cause, "error_set": [], "final": "{}"})
        return PipelineResult(
            outcome=Outcome.FAILED,
            final=(),
            feedback=cause,
            analysis=analysis,
            usage=usage,
            state_version=session.home.timestamp,
            failure_cause=cause,
        )

    @staticmethod
    def _emit(sink: EventSink | None, kind: str, payload: dict) -> None:
        if sink is not None:
            sink(kind, payload)


def _clarification_question(
    analysis: IntentAnalysis, home: HomeState
) -> tuple[str, tuple[str, ...]]:
    """Deterministic question listing the candidate devices, when known."""
    for verdict in analysis.operations:
        if verdict.ambiguous and verdict.candidates:
            options = tuple(sorted(verdict.candidates))
            types = set()
            for option in options:
                room, _, device_id = option.partition(".")
                device = lookup_device(home, room, device_id)
                if device is not None:
                    types.add(device.device_type)
            label = types.pop() if len(types) == 1 else "device"
            return f"Which {label}? Options: {', '.join(options)}", options
    return "Which device do you mean?", ()
