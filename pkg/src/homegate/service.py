"""HTTP service: homes, sessions, instruction execution, progress events.

Sessions never share mutable state; each one starts from a copy-on-write
view of a registered home.  Progress is published as a per-session ordered
event log replayable over server-sent events (``Last-Event-ID`` resumes
without gaps or duplicates).
"""

from __future__ import annotations

import itertools
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator

from fastapi import FastAPI, Header, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .home_model import HomeState, SnapshotError, load_snapshot, render_state_text, snapshot_document
from .pipeline import Pipeline, Session
from .generator import DEFAULT_FEW_SHOT

DEFAULT_IDLE_TIMEOUT_SECONDS = 30 * 60


class InstructionBody(BaseModel):
    text: str


class ClarifyBody(BaseModel):
    answer: str


class SessionBody(BaseModel):
    home_id: str


@dataclass
class SessionEntry:
    session: Session
    events: list[tuple[int, str, dict]] = field(default_factory=list)
    condition: threading.Condition = field(default_factory=threading.Condition)
    last_active: float = field(default_factory=time.monotonic)
    counter: "itertools.count[int]" = field(default_factory=lambda: itertools.count(1))

    def emit(self, kind: str, payload: dict) -> None:
        with self.condition:
            self.events.append((next(self.counter), kind, payload))
            self.condition.notify_all()

    def touch(self) -> None:
        self.last_active = time.monotonic()


class ServiceState:
    def __init__(
        self,
        pipeline: Pipeline,
        *,
        idle_timeout_seconds: float = DEFAULT_IDLE_TIMEOUT_SECONDS,
    ) -> None:
        self.pipeline = pipeline
        self.idle_timeout_seconds = idle_timeout_seconds
        self.homes: dict[str, HomeState] = {}
        self.sessions: dict[str, SessionEntry] = {}
        self._lock = threading.Lock()
        self._session_ids = itertools.count(1)

    def register_home(self, state: HomeState) -> str:
        with self._lock:
            self.homes[state.home_id] = state
        return state.home_id

    def create_session(self, home_id: str) -> SessionEntry:
        with self._lock:
            self._sweep_locked()
            home = self.homes.get(home_id)
            if home is None:
                raise KeyError(home_id)
            session = Session(home=home, id=f"s{next(self._session_ids):06d}")
            entry = SessionEntry(session=session)
            self.sessions[session.id] = entry
            return entry

    def entry(self, session_id: str) -> SessionEntry:
        with self._lock:
            self._sweep_locked()
            entry = self.sessions.get(session_id)
            if entry is None:
                raise KeyError(session_id)
            entry.touch()
            return entry

    def _sweep_locked(self) -> None:
        deadline = time.monotonic() - self.idle_timeout_seconds
        expired = [sid for sid, e in self.sessions.items() if e.last_active < deadline]
        for sid in expired:
            del self.sessions[sid]


def create_app(
    stage1_backend: Any,
    stage2_backend: Any,
    *,
    homes_dir: str | Path | None = None,
    stage1_enabled: bool = True,
    idle_timeout_seconds: float = DEFAULT_IDLE_TIMEOUT_SECONDS,
) -> FastAPI:
    pipeline = Pipeline(
        stage1_backend,
        stage2_backend,
        few_shot=DEFAULT_FEW_SHOT,
        stage1_enabled=stage1_enabled,
    )
    state = ServiceState(pipeline, idle_timeout_seconds=idle_timeout_seconds)
    app = FastAPI(title="homegate")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = state

    if homes_dir is not None:
        for path in sorted(Path(homes_dir).glob("*.json")):
            state.register_home(load_snapshot(path.read_text(encoding="utf-8")))

    @app.post("/homes")
    def post_home(document: dict) -> dict:
        try:
            home = load_snapshot(document)
        except SnapshotError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        if not home.home_id:
            raise HTTPException(status_code=422, detail="home_id: must be non-empty")
        return {"home_id": state.register_home(home)}

    @app.get("/homes/{home_id}/state")
    def get_home_state(home_id: str) -> dict:
        home = state.homes.get(home_id)
        if home is None:
            raise HTTPException(status_code=404, detail=f"unknown home {home_id!r}")
        return {
            "home_id": home_id,
            "version": home.timestamp,
            "rendered": render_state_text(home),
            "structured": snapshot_document(home),
        }

    @app.post("/sessions")
    def post_session(body: SessionBody) -> dict:
        try:
            entry = state.create_session(body.home_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown home {body.home_id!r}") from None
        return {"session_id": entry.session.id, "home_id": body.home_id}

    @app.get("/sessions/{session_id}/state")
    def get_session_state(session_id: str) -> dict:
        entry = _entry_or_404(session_id)
        home = entry.session.home
        return {
            "session_id": session_id,
            "version": home.timestamp,
            "rendered": render_state_text(home),
            "structured": snapshot_document(home),
        }

    @app.post("/sessions/{session_id}/instruction")
    def post_instruction(session_id: str, body: InstructionBody) -> dict:
        entry = _entry_or_404(session_id)
        if entry.session.pending_clarification is not None:
            raise HTTPException(
                status_code=409, detail="session has a pending clarification"
            )
        result = pipeline.execute_instruction(
            entry.session, body.text, event_sink=entry.emit
        )
        entry.touch()
        return result.to_json_dict()

    @app.post("/sessions/{session_id}/clarify")
    def post_clarify(session_id: str, body: ClarifyBody) -> dict:
        entry = _entry_or_404(session_id)
        if entry.session.pending_clarification is None:
            raise HTTPException(status_code=409, detail="no pending clarification")
        result = pipeline.answer_clarification(
            entry.session, body.answer, event_sink=entry.emit
        )
        entry.touch()
        return result.to_json_dict()

    @app.get("/sessions/{session_id}/events")
    def get_events(
        session_id: str,
        request: Request,
        follow: bool = Query(default=True),
        timeout: float = Query(default=0.0, description="close after this many idle seconds"),
        last_event_id: str | None = Header(default=None, alias="Last-Event-ID"),
    ) -> StreamingResponse:
        entry = _entry_or_404(session_id)
        after = int(last_event_id) if last_event_id and last_event_id.isdigit() else 0
        generator = _event_stream(entry, after, follow, timeout)
        return StreamingResponse(
            generator,
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    @app.get("/usage")
    def get_usage() -> dict:
        return pipeline.tally.snapshot().to_json_dict()

    def _entry_or_404(session_id: str) -> SessionEntry:
        try:
            return state.entry(session_id)
        except KeyError:
            raise HTTPException(
                status_code=404, detail=f"unknown session {session_id!r}"
            ) from None

    return app


def _event_stream(
    entry: SessionEntry, after: int, follow: bool, timeout: float
) -> Iterator[str]:
    cursor = after
    idle_since = time.monotonic()
    while True:
        with entry.condition:
            fresh = [e for e in entry.events if e[0] > cursor]
            if not fresh and follow:
                entry.condition.wait(timeout=0.5)
                fresh = [e for e in entry.events if e[0] > cursor]
        if fresh:
            idle_since = time.monotonic()
            for seq, kind, payload in fresh:
                cursor = seq
                yield f"id: {seq}\nevent: {kind}\ndata: {json.dumps(payload)}\n\n"
            continue
        if not follow:
            return
        if timeout and time.monotonic() - idle_since > timeout:
            return
        yield ": keepalive\n\n"


def serve(
    stage1_backend: Any,
    stage2_backend: Any,
    *,
    host: str = "127.0.0.1",
    port: int = 8410,
    homes_dir: str | Path | None = None,
    stage1_enabled: bool = True,
) -> None:
    """Run the service until interrupted (in-flight requests drain on shutdown)."""
    import uvicorn

    app = create_app(
        stage1_backend,
        stage2_backend,
        homes_dir=homes_dir,
        stage1_enabled=stage1_enabled,
    )
    uvicorn.run(app, host=host, port=port, log_level="info")
