"""Atomic device actions and the textual machine-instruction format.

An instruction block looks like ``{kitchen.light.turn_on(), error_input}``:
a comma-separated list of ``room.device.method(args)`` calls and/or the
literal failure token ``error_input``, enclosed in braces.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Union

ERROR_TOKEN_TEXT = "error_input"

_IDENT_RE = re.compile(r"^[a-z_][a-z0-9_]*$")
_INT_RE = re.compile(r"^[+-]?[0-9]+$")
_FLOAT_RE = re.compile(
    r"^[+-]?(?:(?:[0-9]+\.[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?|[0-9]+[eE][+-]?[0-9]+)$"
)
_CALL_RE = re.compile(
    r"^(?P<room>[A-Za-z_][A-Za-z0-9_ ]*)\."
    r"(?P<device>[A-Za-z_][A-Za-z0-9_ ]*)\."
    r"(?P<method>[A-Za-z_][A-Za-z0-9_ ]*)"
    r"\((?P<args>.*)\)$",
    re.DOTALL,
)


class SequenceParseError(ValueError):
    """Raised when no instruction block can be extracted at all."""


def normalize_identifier(text: str) -> str:
    """Canonical identifier form: lowercase, inner whitespace/hyphens as underscores."""
    return re.sub(r"[\s\-]+", "_", text.strip().lower())


@dataclass(frozen=True)
class Call:
    """A grounded device command: room, device, method, literal arguments."""

    room: str
    device: str
    capability: str
    params: tuple[Any, ...] = ()

    def __str__(self) -> str:
        args = ", ".join(render_literal(p) for p in self.params)
        return f"{self.room}.{self.device}.{self.capability}({args})"


@dataclass(frozen=True)
class ErrorToken:
    """Positional marker for an operation that cannot (or must not) run."""

    def __str__(self) -> str:
        return ERROR_TOKEN_TEXT


ERROR_TOKEN = ErrorToken()

AtomicAction = Union[Call, ErrorToken]
ActionSequence = tuple[AtomicAction, ...]


@dataclass(frozen=True)
class ItemError:
    """A single malformed item inside an otherwise usable block."""

    index: int
    text: str
    message: str


@dataclass(frozen=True)
class ParsedSequence:
    actions: ActionSequence
    item_errors: tuple[ItemError, ...] = field(default=())


def parse_sequence(text: str) -> ActionSequence:
    """Parse the first balanced ``{...}`` block of ``text`` into actions.

    Malformed items degrade to :data:`ERROR_TOKEN` at their position so the
    element count always matches the comma-separated item count.  Raises
    :class:`SequenceParseError` only when no balanced block exists.
    """
    return parse_sequence_detailed(text).actions


def parse_sequence_detailed(text: str) -> ParsedSequence:
    """Like :func:`parse_sequence` but also reports per-item parse errors."""
    block = _extract_block(text)
    if block is None:
        raise SequenceParseError("no instruction block")

    segments = _split_top_level(block)
    if len(segments) == 1 and not segments[0].strip():
        return ParsedSequence(actions=())
    # A trailing comma is common model noise; an empty final segment is dropped.
    if len(segments) > 1 and not segments[-1].strip():
        segments = segments[:-1]

    actions: list[AtomicAction] = []
    errors: list[ItemError] = []
    for index, segment in enumerate(segments):
        item = segment.strip()
        try:
            actions.append(_parse_item(item))
        except ValueError as exc:
            actions.append(ERROR_TOKEN)
            errors.append(ItemError(index=index, text=item, message=str(exc)))
    return ParsedSequence(actions=tuple(actions), item_errors=tuple(errors))


def render_sequence(seq: ActionSequence) -> str:
    """Canonical text for a sequence; the inverse of :func:`parse_sequence`."""
    return "{" + ", ".join(str(a) for a in seq) + "}"


def render_literal(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    text = str(value)
    if _IDENT_RE.match(text) and text not in ("true", "false"):
        return text
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def normalize_action(action: AtomicAction) -> AtomicAction:
    """Canonical form for comparison: normalized identifiers, integral floats as ints."""
    if isinstance(action, ErrorToken):
        return action
    return Call(
        room=normalize_identifier(action.room),
        device=normalize_identifier(action.device),
        capability=normalize_identifier(action.capability),
        params=tuple(_canonical_literal(p) for p in action.params),
    )


def normalize_sequence(seq: ActionSequence) -> ActionSequence:
    return tuple(normalize_action(a) for a in seq)


def _canonical_literal(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def _extract_block(text: str) -> str | None:
    """Return the interior of the first balanced brace region, if any."""
    start = text.find("{")
    while start != -1:
        depth = 0
        in_quote: str | None = None
        escape = False
        for pos in range(start, len(text)):
            ch = text[pos]
            if in_quote is not None:
                if escape:
                    escape = False
                elif ch == "\\":
                    escape = True
                elif ch == in_quote:
                    in_quote = None
                continue
            if ch in "'\"":
                in_quote = ch
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[start + 1 : pos]
        start = text.find("{", start + 1)
    return None


def _split_top_level(block: str) -> list[str]:
    """Split on commas outside parentheses, braces, and quotes."""
    segments: list[str] = []
    current: list[str] = []
    depth = 0
    in_quote: str | None = None
    escape = False
    for ch in block:
        if in_quote is not None:
            current.append(ch)
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == in_quote:
                in_quote = None
            continue
        if ch in "'\"":
            in_quote = ch
            current.append(ch)
        elif ch in "([{":
            depth += 1
            current.append(ch)
        elif ch in ")]}":
            depth -= 1
            current.append(ch)
        elif ch == "," and depth == 0:
            segments.append("".join(current))
            current = []
        else:
            current.append(ch)
    segments.append("".join(current))
    return segments


def _parse_item(item: str) -> AtomicAction:
    if not item:
        raise ValueError("empty item")
    if normalize_identifier(item) == ERROR_TOKEN_TEXT:
        return ERROR_TOKEN
    match = _CALL_RE.match(item)
    if not match:
        raise ValueError(f"not a call or {ERROR_TOKEN_TEXT!r}: {item!r}")
    args_text = match.group("args").strip()
    params: tuple[Any, ...] = ()
    if args_text:
        params = tuple(_parse_literal(a.strip()) for a in _split_top_level(args_text))
    return Call(
        room=normalize_identifier(match.group("room")),
        device=normalize_identifier(match.group("device")),
        capability=normalize_identifier(match.group("method")),
        params=params,
    )


def _parse_literal(raw: str) -> Any:
    if not raw:
        raise ValueError("empty argument")
    if len(raw) >= 2 and raw[0] in "'\"" and raw[-1] == raw[0]:
        return _unescape(raw[1:-1])
    if _INT_RE.match(raw):
        return int(raw)
    if _FLOAT_RE.match(raw):
        return float(raw)
    if raw == "true":
        return True
    if raw == "false":
        return False
    if _IDENT_RE.match(normalize_identifier(raw)) and "." not in raw:
        return raw
    raise ValueError(f"bad argument literal: {raw!r}")


def _unescape(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        if text[i] == "\\" and i + 1 < len(text):
            out.append(text[i + 1])
            i += 2
        else:
            out.append(text[i])
            i += 1
    return "".join(out)
