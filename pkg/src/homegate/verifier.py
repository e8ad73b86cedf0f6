"""Deterministic grounding checks: room, then device, then capability.

Each atomic action must name a room that exists, a device bound to that
room, and a method the device supports with in-range arguments.  The
conjunction of the three levels decides whether an action may execute;
failures are replaced in-place by the error token so a multi-step command
never loses its alignment.
"""

from __future__ import annotations

from dataclasses import dataclass

from .actions import ERROR_TOKEN, ActionSequence, AtomicAction, Call, ErrorToken
from .home_model import HomeState, lookup_device


@dataclass(frozen=True)
class VerificationResult:
    action: AtomicAction
    level_room: bool
    level_device: bool
    level_capability: bool
    passed: bool
    failure_reason: str | None = None


@dataclass(frozen=True)
class FilterOutcome:
    final: ActionSequence
    results: tuple[VerificationResult, ...]
    error_set: frozenset[str]


def verify_room(action: AtomicAction, state: HomeState) -> bool:
    """Level 1: the target room exists in the home."""
    if isinstance(action, ErrorToken):
        raise ValueError("error token has no room to verify")
    return action.room in state.rooms


def verify_device(action: AtomicAction, state: HomeState) -> bool:
    """Level 2: the target device is bound to the named room."""
    if isinstance(action, ErrorToken):
        raise ValueError("error token has no device to verify")
    return lookup_device(state, action.room, action.device) is not None


def verify_capability(action: AtomicAction, state: HomeState) -> bool:
    """Level 3: the device supports the method and the arguments fit its spec."""
    if isinstance(action, ErrorToken):
        raise ValueError("error token has no capability to verify")
    device = lookup_device(state, action.room, action.device)
    if device is None:
        raise ValueError(f"device check must pass first: {action.room}.{action.device}")
    cap = device.capability(action.capability)
    return cap is not None and cap.validate_params(action.params)


def verify_action(action: AtomicAction, state: HomeState) -> VerificationResult:
    """Cascade evaluation with short-circuit: a failed level zeroes the rest."""
    if isinstance(action, ErrorToken):
        return VerificationResult(
            action=action,
            level_room=False,
            level_device=False,
            level_capability=False,
            passed=False,
            failure_reason="error_token",
        )
    if not verify_room(action, state):
        return _failed(action, "missing_room", action.room, room=False)
    if not verify_device(action, state):
        return _failed(
            action, "missing_device", f"{action.room}.{action.device}", room=True
        )
    device = lookup_device(state, action.room, action.device)
    cap = device.capability(action.capability)
    entity = f"{action.room}.{action.device}.{action.capability}"
    if cap is None:
        return _failed(action, "missing_capability", entity, room=True, device=True)
    if not cap.validate_params(action.params):
        return _failed(action, "bad_params", entity, room=True, device=True)
    return VerificationResult(
        action=action,
        level_room=True,
        level_device=True,
        level_capability=True,
        passed=True,
    )


def _failed(
    action: Call, kind: str, entity: str, *, room: bool, device: bool = False
) -> VerificationResult:
    return VerificationResult(
        action=action,
        level_room=room,
        level_device=device,
        level_capability=False,
        passed=False,
        failure_reason=f"{kind}:{entity}",
    )


def filter_sequence(raw: ActionSequence, state: HomeState) -> FilterOutcome:
    """Replace each ungrounded element with the error token at the same index.

    Nothing is executed here; passing elements flow through untouched so the
    caller can apply them in order.
    """
    results = tuple(verify_action(action, state) for action in raw)
    final = tuple(r.action if r.passed else ERROR_TOKEN for r in results)
    error_set = frozenset(
        r.action.device
        for r in results
        if not r.passed and isinstance(r.action, Call)
    )
    return FilterOutcome(final=final, results=results, error_set=error_set)
