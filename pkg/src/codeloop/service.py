"""The networked agent service.

Endpoints (JSON bodies):

    POST /sessions                    create a session, loop runs async
    GET  /sessions/{id}               session projection
    GET  /sessions/{id}/events        server-push event stream (SSE)
    POST /sessions/{id}/approve       {"grant": bool}
    POST /sessions/{id}/feedback      {"text": str, "accomplished": bool}
    POST /sessions/{id}/rollback      {"snapshot_id": int?}
    GET  /state                       live host state + hash
    GET  /audit?session=&from=&to=    audit entries
    POST /execute                     {"code": str}; requires --allow-raw-exec

Every mutating endpoint funnels through the analyze -> guard -> execute
pipeline (sessions and raw execution) or through the statekeeper's audited
rollback; nothing else can touch host state.

Sessions without a fixture run on the single live host instance, serialized
by a lock; a second concurrent live session is refused with 409. Fixture
sessions get isolated host instances.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from codeloop.agent.session import (
    AgentConfig,
    AgentRunner,
    RUNNING,
    ROLLED_BACK,
    Session,
    TERMINAL,
    WrongState,
)
from codeloop.contextindex import load_default_index
from codeloop.hostapp.fixtures import UnknownFixture, init_fixture
from codeloop.hostapp.state import state_hash, state_to_dict
from codeloop.llm import (
    CassetteStore,
    DelayProvider,
    HttpChatProvider,
    ProviderConfig,
    RecordingProvider,
    ReplayProvider,
    ScriptedProvider,
    ScriptTable,
)
from codeloop.safety.analyzer import analyze
from codeloop.safety.rules import DENY, NEEDS_APPROVAL, load_rules, load_rules_file, make_guard
from codeloop.sandbox.executor import ActionCode, ExecutionResult, execute
from codeloop.sandbox.parser import JsSyntaxError
from codeloop.statekeeper import StateKeeper, UnknownSnapshot

DEFAULT_PORT = 8787


@dataclass
class ServiceConfig:
    port: int = DEFAULT_PORT
    data_dir: str = "./codeloop-data"
    rules_file: str | None = None  # None -> packaged default profile
    fixture: str = "default"
    allow_raw_exec: bool = False
    provider: str = "scripted"  # scripted | http | replay
    script_table: str | None = None  # None -> packaged table
    provider_endpoint: str = ""
    provider_model: str = ""
    provider_api_key_env: str = "CODELOOP_API_KEY"
    provider_delay_ms: float = 0.0
    cassette_dir: str | None = None
    record: bool = False
    replay: bool = False
    max_iterations: int = 5
    verification: str = "none"


def build_provider(config: ServiceConfig):
    if config.provider == "scripted":
        if config.script_table:
            table = ScriptTable.load(config.script_table)
        else:
            table = ScriptTable.from_json(
                resources.files("codeloop.data").joinpath("scripted/table2.json").read_text(encoding="utf-8")
            )
        provider = ScriptedProvider(table)
    elif config.provider == "http":
        provider = HttpChatProvider(
            ProviderConfig(
                name="http",
                endpoint=config.provider_endpoint,
                model_name=config.provider_model,
                api_key_env=config.provider_api_key_env,
            )
        )
    elif config.provider == "replay":
        if not config.cassette_dir:
            raise ValueError("replay provider needs a cassette directory")
        provider = ReplayProvider(CassetteStore(config.cassette_dir))
    else:
        raise ValueError(f"unknown provider {config.provider!r}")
    if config.record:
        if not config.cassette_dir:
            raise ValueError("--record needs a cassette directory")
        provider = RecordingProvider(provider, CassetteStore(config.cassette_dir))
    if config.provider_delay_ms > 0:
        provider = DelayProvider(provider, config.provider_delay_ms)
    return provider


def load_service_rules(config: ServiceConfig):
    if config.rules_file:
        return load_rules_file(config.rules_file)
    return load_rules(
        resources.files("codeloop.data").joinpath("rules/default.rules").read_text(encoding="utf-8")
    )


@dataclass
class _SessionHandle:
    session: Session
    runner: AgentRunner
    live: bool
    events: list[dict] = field(default_factory=list)
    cond: threading.Condition = field(default_factory=threading.Condition)
    lock: threading.Lock = field(default_factory=threading.Lock)
    stream_closed: bool = False  # set once the terminal status event is appended

    def emit(self, kind: str, payload: dict) -> None:
        with self.cond:
            self.events.append(
                {
                    "session_id": self.session.id,
                    "kind": kind,
                    "payload": payload,
                    "seq": len(self.events) + 1,
                }
            )
            if kind == "status_changed" and payload.get("status") in TERMINAL:
                self.stream_closed = True
            self.cond.notify_all()

    def close_stream(self) -> None:
        with self.cond:
            self.stream_closed = True
            self.cond.notify_all()

    @property
    def terminal(self) -> bool:
        return self.session.status in TERMINAL


class AgentService:
    """All mutable service state lives here; the FastAPI app delegates to it."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.keeper = StateKeeper(config.data_dir)
        self.rules = load_service_rules(config)
        self.index = load_default_index()
        self.provider = build_provider(config)
        self.recovered = self.keeper.recover_interrupted_sessions()
        self.live_state = init_fixture(config.fixture)
        self.live_lock = threading.Lock()
        self.live_owner: str | None = None
        self.handles: dict[str, _SessionHandle] = {}
        self.pipeline_runs = 0  # structural hook for the endpoint-coverage test

    # --- sessions ---

    def create_session(
        self,
        instruction: str,
        fixture: str | None,
        max_iterations: int | None,
        rules_profile: str | None,
    ) -> str:
        if not instruction or not instruction.strip():
            raise HTTPException(status_code=400, detail="instruction must be non-empty")
        live = fixture is None
        if live:
            with self.live_lock:
                if self.live_owner is not None:
                    raise HTTPException(status_code=409, detail="live host is busy with another session")
                self.live_owner = "pending"
        try:
            try:
                state = self.live_state if live else init_fixture(fixture)
            except UnknownFixture as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            rules = self.rules
            if rules_profile:
                try:
                    rules = load_rules_file(rules_profile)
                except OSError as exc:
                    raise HTTPException(status_code=400, detail=f"cannot read rules profile: {exc}") from exc
        except Exception:
            if live:
                self._release_live("pending")
            raise
        session_id = uuid.uuid4().hex[:12]
        config = AgentConfig(
            max_iterations=max_iterations or self.config.max_iterations,
            verification=self.config.verification,
        )
        handle_box: dict = {}

        def on_event(session: Session, kind: str, payload: dict) -> None:
            handle = handle_box.get("handle")
            if handle is not None:
                handle.emit(kind, dict(payload))

        def on_state_change(session: Session) -> None:
            if live:
                self.live_state = session.state

        runner = AgentRunner(
            self.provider,
            rules,
            self.keeper,
            self.index,
            config,
            on_event=on_event,
            on_state_change=on_state_change,
        )
        try:
            session = runner.create_session(
                instruction, state, fixture or "live", session_id=session_id
            )
        except Exception:
            if live:
                self._release_live("pending")
            raise
        handle = _SessionHandle(session=session, runner=runner, live=live)
        handle_box["handle"] = handle
        self.handles[session_id] = handle
        if live:
            with self.live_lock:
                self.live_owner = session_id
        self._spawn(handle)
        return session_id

    def _release_live(self, owner: str) -> None:
        with self.live_lock:
            if self.live_owner == owner:
                self.live_owner = None

    def _spawn(self, handle: _SessionHandle) -> None:
        def work() -> None:
            with handle.lock:
                try:
                    self.pipeline_runs += 1
                    handle.runner.run(handle.session)
                except Exception as exc:  # infrastructure failure: fail, don't wedge
                    if not handle.terminal:
                        handle.runner._fail(
                            handle.session, f"infrastructure failure: {type(exc).__name__}: {exc}"
                        )
                finally:
                    if handle.terminal:
                        self._release_live(handle.session.id)
                        handle.close_stream()

        threading.Thread(target=work, name=f"session-{handle.session.id}", daemon=True).start()

    def get_handle(self, session_id: str) -> _SessionHandle:
        handle = self.handles.get(session_id)
        if handle is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return handle

    def session_projection(self, session_id: str) -> dict:
        handle = self.handles.get(session_id)
        if handle is not None:
            out = handle.session.to_dict()
            out["live"] = handle.live
            return out
        # not in memory: maybe persisted from a previous process life
        records = self.keeper.session_records()
        if session_id not in records:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        record = records[session_id]
        return {
            "id": session_id,
            "instruction": record["instruction"],
            "fixture": record["fixture"],
            "status": record["status"],
            "iterations": [],
            "pre_session_snapshot": record["pre_snapshot"],
            "recovered": True,
        }

    def approve(self, session_id: str, grant: bool) -> dict:
        handle = self.get_handle(session_id)
        with handle.lock:
            try:
                handle.runner.approve(handle.session, grant)
            except WrongState as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
        if handle.session.status == RUNNING:
            self._spawn(handle)
        elif handle.terminal:
            self._release_live(session_id)
            handle.close_stream()
        return {"status": handle.session.status}

    def feedback(self, session_id: str, text: str, accomplished: bool) -> dict:
        handle = self.get_handle(session_id)
        with handle.lock:
            try:
                handle.runner.feedback(handle.session, text, accomplished)
            except WrongState as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
        if handle.session.status == RUNNING:
            self._spawn(handle)
        elif handle.terminal:
            self._release_live(session_id)
            handle.close_stream()
        return {"status": handle.session.status}

    def rollback(self, session_id: str, snapshot_id: int | None) -> dict:
        handle = self.handles.get(session_id)
        records = self.keeper.session_records()
        if handle is None and session_id not in records:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        if snapshot_id is None:
            if handle is not None:
                snapshot_id = handle.session.pre_session_snapshot
            else:
                snapshot_id = records[session_id]["pre_snapshot"]
        try:
            restored = self.keeper.rollback(snapshot_id, session_id)
        except UnknownSnapshot as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        if handle is not None:
            with handle.lock:
                handle.session.state = restored
                if handle.live:
                    self.live_state = restored
                if handle.session.status not in TERMINAL:
                    handle.session.status = ROLLED_BACK
                    self.keeper.record_session_status(session_id, ROLLED_BACK)
                    handle.emit("status_changed", {"status": ROLLED_BACK})
                    self._release_live(session_id)
        else:
            # recovered session: the live host inherits the restored state
            self.live_state = restored
        return {"snapshot_id": snapshot_id, "state_hash": state_hash(restored)}

    # --- raw execution ---

    def execute_raw(self, code_text: str) -> dict:
        if not self.config.allow_raw_exec:
            raise HTTPException(status_code=403, detail="raw execution is disabled (--allow-raw-exec)")
        self.pipeline_runs += 1
        code = ActionCode.js(code_text)
        try:
            verdict = analyze(code, self.rules)
        except JsSyntaxError as exc:
            return {
                "verdict": {"decision": "Deny", "reasons": [{"reason": str(exc), "at": "1:1"}]},
                "result": ExecutionResult(status="runtime_error").to_dict(),
            }
        if verdict.decision in (DENY, NEEDS_APPROVAL):
            reason = "; ".join(r for r, _ in verdict.reasons) or verdict.decision
            result = ExecutionResult(status="denied")
            self.keeper.append_audit(
                session_id="raw",
                iteration_index=0,
                code_hash=code.hash,
                verdict_decision=verdict.decision,
                result_status="denied",
                snapshot_id=self.keeper.take_snapshot(self.live_state, "raw", 0),
                state_diff=[],
            )
            out = result.to_dict()
            out["error"] = {"kind": "GuardDenied", "message": reason}
            return {"verdict": verdict.to_dict(), "result": out}
        with self.live_lock:
            snap = self.keeper.take_snapshot(self.live_state, "raw", 0)
            new_state, result = execute(code, self.live_state, guard=make_guard(self.rules))
            self.live_state = new_state
            self.keeper.append_audit(
                session_id="raw",
                iteration_index=0,
                code_hash=code.hash,
                verdict_decision=verdict.decision,
                result_status=result.status,
                snapshot_id=snap,
                state_diff=result.state_diff.to_list(),
            )
        return {"verdict": verdict.to_dict(), "result": result.to_dict()}


def sse_format(event: dict) -> str:
    return f"id: {event['seq']}\ndata: {json.dumps(event)}\n\n"


def create_app(config: ServiceConfig | None = None, service: AgentService | None = None) -> FastAPI:
    service = service or AgentService(config or ServiceConfig())
    app = FastAPI(title="codeloop agent service")
    app.state.service = service

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request) -> dict:
        body = await request.json()
        session_id = service.create_session(
            instruction=body.get("instruction", ""),
            fixture=body.get("fixture"),
            max_iterations=body.get("max_iterations"),
            rules_profile=body.get("rules_profile"),
        )
        return {"id": session_id}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return service.session_projection(session_id)

    @app.get("/sessions/{session_id}/events")
    def stream_events(session_id: str) -> StreamingResponse:
        handle = service.get_handle(session_id)

        def generate():
            cursor = 0
            while True:
                with handle.cond:
                    while cursor >= len(handle.events) and not handle.stream_closed:
                        handle.cond.wait(timeout=0.5)
                    batch = handle.events[cursor:]
                    cursor += len(batch)
                    done = handle.stream_closed and cursor >= len(handle.events)
                for event in batch:
                    yield sse_format(event)
                if done:
                    return

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.post("/sessions/{session_id}/approve")
    async def approve(session_id: str, request: Request) -> dict:
        body = await request.json()
        if "grant" not in body:
            raise HTTPException(status_code=400, detail="body must carry grant: bool")
        return service.approve(session_id, bool(body["grant"]))

    @app.post("/sessions/{session_id}/feedback")
    async def feedback(session_id: str, request: Request) -> dict:
        body = await request.json()
        return service.feedback(
            session_id, str(body.get("text", "")), bool(body.get("accomplished", False))
        )

    @app.post("/sessions/{session_id}/rollback")
    async def rollback(session_id: str, request: Request) -> dict:
        body = await request.json() if await request.body() else {}
        snapshot_id = body.get("snapshot_id")
        return service.rollback(session_id, snapshot_id)

    @app.get("/state")
    def get_state() -> dict:
        state = service.live_state
        return {
            "state": state_to_dict(state),
            "hash": state_hash(state),
            "route": state.current_route,
        }

    @app.get("/audit")
    def get_audit(session: str | None = None, seq_from: int | None = None, seq_to: int | None = None) -> dict:
        entries = service.keeper.query_audit(session_id=session, seq_from=seq_from, seq_to=seq_to)
        return {"entries": [e.to_dict() for e in entries]}

    @app.post("/execute")
    async def execute_raw(request: Request) -> dict:
        body = await request.json()
        if "code" not in body:
            raise HTTPException(status_code=400, detail="body must carry code: str")
        return service.execute_raw(str(body["code"]))

    @app.exception_handler(ValueError)
    async def value_error_handler(_request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    ui_dir = Path(__file__).parent.parent.parent / "frontend" / "dist"
    if ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


# documented wire surface; the endpoint-coverage test checks the app against it
DOCUMENTED_ENDPOINTS = {
    ("POST", "/sessions"),
    ("GET", "/sessions/{session_id}"),
    ("GET", "/sessions/{session_id}/events"),
    ("POST", "/sessions/{session_id}/approve"),
    ("POST", "/sessions/{session_id}/feedback"),
    ("POST", "/sessions/{session_id}/rollback"),
    ("GET", "/state"),
    ("GET", "/audit"),
    ("POST", "/execute"),
}
