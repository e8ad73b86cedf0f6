"""Pluggable completion backends: remote HTTP, replay, and two test oracles.

The rule oracle exists to exercise the pipeline's plumbing, not to
understand language: synthetic instructions carry a structured suffix
(``##intent## {...}``) describing the ground-truth operations, and the
oracle answers stage prompts straight from it.  The noisy oracle wraps the
same logic and corrupts generated calls at a controlled rate to simulate a
model that invents entities.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .actions import Call, parse_sequence, render_sequence

INTENT_MARKER = "##intent##"
CLARIFICATION_PREFIX = "User clarified:"
API_KEY_ENV = "HOMEGATE_API_KEY"

# Sentinel lines identifying which stage a prompt belongs to.
STAGE1_SENTINEL = "You are a smart home intent analyzer."
STAGE2_SENTINEL = "You are 'Al', a helpful AI Assistant that controls the devices in a house."
ANALYSIS_BLOCK_HEADER = "Stage-1 analysis:"


class BackendError(RuntimeError):
    """Transport failure, missing transcript entry, or malformed embedded intent."""


@dataclass(frozen=True)
class TokenUsage:
    prompt_tokens: int = 0
    completion_tokens: int = 0
    reported: bool = False

    @property
    def total(self) -> int:
        return self.prompt_tokens + self.completion_tokens


@dataclass(frozen=True)
class CompletionResult:
    text: str
    usage: TokenUsage


@dataclass(frozen=True)
class BackendSpec:
    kind: str  # http | scripted | rule_oracle | noisy_oracle
    options: Mapping[str, Any] = field(default_factory=dict)


def approx_tokens(text: str) -> int:
    """Character-count approximation used when a provider reports no usage."""
    return math.ceil(len(text) / 4)


def _approx_usage(prompt: str, completion: str) -> TokenUsage:
    return TokenUsage(
        prompt_tokens=approx_tokens(prompt),
        completion_tokens=approx_tokens(completion),
        reported=False,
    )


def embed_intent(instruction: str, intent: Mapping[str, Any]) -> str:
    """Append the machine-readable ground-truth suffix to an instruction."""
    return f"{instruction} {INTENT_MARKER} {json.dumps(intent, sort_keys=True)}"


def strip_intent(instruction: str) -> str:
    """Human-readable part of an instruction, without the embedded suffix."""
    pos = instruction.find(INTENT_MARKER)
    return instruction if pos == -1 else instruction[:pos].rstrip()


def extract_intent(text: str) -> dict[str, Any]:
    """Decode the embedded intent from an instruction or a full prompt."""
    pos = text.find(INTENT_MARKER)
    if pos == -1:
        raise BackendError("no embedded intent in prompt")
    tail = text[pos + len(INTENT_MARKER) :].lstrip()
    try:
        intent, _ = json.JSONDecoder().raw_decode(tail)
    except json.JSONDecodeError as exc:
        raise BackendError(f"malformed embedded intent: {exc}") from None
    if not isinstance(intent, dict) or not isinstance(intent.get("ops"), list):
        raise BackendError("malformed embedded intent: expected object with 'ops'")
    return intent


def extract_clarification(text: str) -> str | None:
    """The user's latest clarification answer, if the dialogue contains one."""
    answer = None
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith(CLARIFICATION_PREFIX):
            answer = stripped[len(CLARIFICATION_PREFIX) :].strip()
    return answer


def _resolve_ops(intent: Mapping[str, Any], prompt: str) -> list[dict[str, Any]]:
    """Operations after applying any clarification answer present in the prompt."""
    ops = intent["ops"]
    answer = extract_clarification(prompt)
    if answer:
        resolved = intent.get("clar", {}).get(answer)
        if resolved is not None:
            ops = resolved["ops"]
    return ops


class RuleOracleBackend:
    """Deterministic stand-in model driven entirely by the embedded intent."""

    def complete(self, prompt: str) -> CompletionResult:
        intent = extract_intent(prompt)
        ops = _resolve_ops(intent, prompt)
        if STAGE1_SENTINEL in prompt:
            text = self._stage1_text(ops)
        elif STAGE2_SENTINEL in prompt:
            text = self._stage2_text(ops, pre_warned=ANALYSIS_BLOCK_HEADER in prompt)
        else:
            raise BackendError("prompt matches neither stage template")
        return CompletionResult(text=text, usage=_approx_usage(prompt, text))

    @staticmethod
    def _stage1_text(ops: list[dict[str, Any]]) -> str:
        operations = []
        for op in ops:
            entry: dict[str, Any] = {
                "description": op.get("desc", ""),
                "valid": bool(op.get("valid", False)),
                "reason": op.get("reason", ""),
            }
            if op.get("amb"):
                entry["ambiguous"] = True
            if op.get("cands"):
                entry["candidates"] = list(op["cands"])
            operations.append(entry)
        all_valid = bool(operations) and all(
            o["valid"] and not o.get("ambiguous") for o in operations
        )
        return json.dumps({"operations": operations, "all_valid": all_valid})

    @staticmethod
    def _stage2_text(ops: list[dict[str, Any]], *, pre_warned: bool) -> str:
        items = []
        grounded_any = False
        for op in ops:
            call = op.get("call", "error_input")
            if not pre_warned and not op.get("valid", False):
                # Un-warned generation: a fraction of impossible operations get
                # mapped onto the nearest existing entity instead of attempted
                # faithfully, which the downstream checks cannot catch.
                if op.get("fg") and op.get("grounded"):
                    call = op["grounded"]
                    grounded_any = True
                else:
                    call = "error_input"
            items.append(call)
        if not pre_warned and not grounded_any and all(i == "error_input" for i in items):
            # A model that sees nothing executable answers with one refusal.
            items = ["error_input"]
        return "{" + ", ".join(items) + "}"


class NoisyOracleBackend:
    """Rule oracle plus seeded per-call corruption of generated device ids."""

    def __init__(
        self,
        noise_rate: float,
        seed: int = 0,
        *,
        mutate_rooms: bool = False,
        mutate_capabilities: bool = False,
    ) -> None:
        if not 0.0 <= noise_rate <= 1.0:
            raise ValueError("noise_rate must be within [0, 1]")
        self.noise_rate = noise_rate
        self.seed = seed
        self.mutate_rooms = mutate_rooms
        self.mutate_capabilities = mutate_capabilities
        self._inner = RuleOracleBackend()

    def complete(self, prompt: str) -> CompletionResult:
        result = self._inner.complete(prompt)
        if self.noise_rate == 0.0 or STAGE2_SENTINEL not in prompt:
            return result
        intent = extract_intent(prompt)
        mutated = self._mutate(result.text, intent, prompt)
        return CompletionResult(text=mutated, usage=_approx_usage(prompt, mutated))

    def _mutate(self, text: str, intent: Mapping[str, Any], prompt: str) -> str:
        absent_devices = list(intent.get("absent_devices", ()))
        absent_rooms = list(intent.get("absent_rooms", ()))
        digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
        rng = random.Random(f"{self.seed}:{digest}")
        actions = []
        for action in parse_sequence(text):
            if isinstance(action, Call) and rng.random() < self.noise_rate:
                action = self._corrupt(action, rng, absent_devices, absent_rooms)
            actions.append(action)
        return render_sequence(tuple(actions))

    def _corrupt(
        self,
        action: Call,
        rng: random.Random,
        absent_devices: list[str],
        absent_rooms: list[str],
    ) -> Call:
        if self.mutate_rooms and absent_rooms and rng.random() < 0.5:
            return Call(
                room=rng.choice(absent_rooms),
                device=action.device,
                capability=action.capability,
                params=action.params,
            )
        if self.mutate_capabilities and rng.random() < 0.5:
            return Call(
                room=action.room,
                device=action.device,
                capability=f"{action.capability}_unsupported",
                params=action.params,
            )
        if absent_devices:
            return Call(
                room=action.room,
                device=rng.choice(absent_devices),
                capability=action.capability,
                params=action.params,
            )
        return action


class ScriptedBackend:
    """Replays recorded responses keyed by the sha-256 digest of the prompt."""

    def __init__(self, transcript: str | Path | list[Mapping[str, str]]) -> None:
        self._responses: dict[str, str] = {}
        if isinstance(transcript, (str, Path)):
            records = []
            with open(transcript, "r", encoding="utf-8") as handle:
                for line in handle:
                    line = line.strip()
                    if line:
                        records.append(json.loads(line))
        else:
            records = list(transcript)
        for record in records:
            self._responses[record["prompt_digest"]] = record["response_text"]

    @staticmethod
    def digest(prompt: str) -> str:
        return hashlib.sha256(prompt.encode("utf-8")).hexdigest()

    def complete(self, prompt: str) -> CompletionResult:
        key = self.digest(prompt)
        if key not in self._responses:
            raise BackendError(f"no transcript entry for prompt digest {key[:12]}…")
        text = self._responses[key]
        return CompletionResult(text=text, usage=_approx_usage(prompt, text))


class TranscriptRecorder:
    """Wraps another backend and appends replayable records to a transcript file."""

    def __init__(self, inner: Any, path: str | Path) -> None:
        self._inner = inner
        self._path = Path(path)
        self._lock = threading.Lock()

    def complete(self, prompt: str) -> CompletionResult:
        result = self._inner.complete(prompt)
        record = {
            "prompt_digest": ScriptedBackend.digest(prompt),
            "response_text": result.text,
        }
        with self._lock:
            with open(self._path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, sort_keys=True) + "\n")
        return result


class HttpBackend:
    """Single-turn chat-completions client in deterministic (temperature 0) mode."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        api_key_env: str = API_KEY_ENV,
        max_in_flight: int = 4,
        retries: int = 0,
        backoff_seconds: float = 1.0,
        timeout_seconds: float = 60.0,
    ) -> None:
        if not endpoint.startswith(("http://", "https://")):
            raise ValueError(f"endpoint is not a URL: {endpoint!r}")
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.retries = retries
        self.backoff_seconds = backoff_seconds
        self.timeout_seconds = timeout_seconds
        self._gate = threading.BoundedSemaphore(max_in_flight)

    def complete(self, prompt: str) -> CompletionResult:
        import requests

        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }
        attempt = 0
        while True:
            try:
                with self._gate:
                    response = requests.post(
                        self.endpoint,
                        json=payload,
                        headers=headers,
                        timeout=self.timeout_seconds,
                    )
                response.raise_for_status()
                break
            except requests.RequestException as exc:
                if attempt >= self.retries:
                    raise BackendError(f"chat completion request failed: {exc}") from exc
                time.sleep(self.backoff_seconds * (2**attempt))
                attempt += 1
        body = response.json()
        try:
            text = body["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"malformed completion response: {exc}") from exc
        usage = body.get("usage") or {}
        if "prompt_tokens" in usage and "completion_tokens" in usage:
            return CompletionResult(
                text=text,
                usage=TokenUsage(
                    prompt_tokens=int(usage["prompt_tokens"]),
                    completion_tokens=int(usage["completion_tokens"]),
                    reported=True,
                ),
            )
        return CompletionResult(text=text, usage=_approx_usage(prompt, text))


def parse_backend_spec(text: str) -> BackendSpec:
    """Parse ``kind[:key=value,...]`` command-line backend descriptions."""
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    options: dict[str, Any] = {}
    if rest:
        if kind == "scripted" and "=" not in rest:
            options["transcript"] = rest
        else:
            for pair in rest.split(","):
                key, sep, value = pair.partition("=")
                if not sep:
                    raise ValueError(f"bad backend option {pair!r}")
                options[key.strip()] = _coerce_option(value.strip())
    return BackendSpec(kind=kind, options=options)


def _coerce_option(value: str) -> Any:
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    if value in ("true", "false"):
        return value == "true"
    return value


def build_backend(spec: BackendSpec) -> Any:
    if spec.kind == "rule_oracle":
        return RuleOracleBackend()
    if spec.kind == "noisy_oracle":
        return NoisyOracleBackend(
            noise_rate=float(spec.options.get("p", 0.0)),
            seed=int(spec.options.get("seed", 0)),
            mutate_rooms=bool(spec.options.get("mutate_rooms", False)),
            mutate_capabilities=bool(spec.options.get("mutate_capabilities", False)),
        )
    if spec.kind == "scripted":
        transcript = spec.options.get("transcript")
        if not transcript:
            raise ValueError("scripted backend needs a transcript path")
        return ScriptedBackend(transcript)
    if spec.kind == "http":
        endpoint = spec.options.get("endpoint")
        if not endpoint:
            raise ValueError("http backend needs endpoint=<url>")
        return HttpBackend(
            endpoint=str(endpoint),
            model=str(spec.options.get("model", "gpt-4o-mini")),
            max_in_flight=int(spec.options.get("max_in_flight", 4)),
            retries=int(spec.options.get("retries", 0)),
        )
    raise ValueError(f"unknown backend kind {spec.kind!r}")


def complete(prompt: str, spec: BackendSpec | Any) -> CompletionResult:
    """One completion against a spec or an already-built backend."""
    backend = build_backend(spec) if isinstance(spec, BackendSpec) else spec
    return backend.complete(prompt)
