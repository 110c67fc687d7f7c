"""Transactional execution of one action-code unit against a host state.

The script runs against a working copy of the state; only an ok outcome
commits. Every other status (runtime_error, denied, timeout,
resource_exhausted) returns the untouched pre-execution state with an empty
diff, so failed agent rounds are side-effect free by construction.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field

from codeloop.hostapp.diffing import StateDiff, diff
from codeloop.hostapp.state import HostState, copy_state
from codeloop.sandbox import parser as jsparser
from codeloop.sandbox.interpreter import (
    BreakSignal,
    BridgeSession,
    ContinueSignal,
    GuardDeniedError,
    Interpreter,
    JsRuntimeError,
    JsThrow,
    JsError,
    LimitExceededError,
    ReturnSignal,
    js_to_string,
    to_jsonable,
)

DEFAULT_WALL_TIMEOUT_MS = 2_000
DEFAULT_STEP_BUDGET = 5_000_000
DEFAULT_OUTPUT_BUDGET = 64 * 1024

STATUS_OK = "ok"
STATUS_RUNTIME_ERROR = "runtime_error"
STATUS_DENIED = "denied"
STATUS_TIMEOUT = "timeout"
STATUS_RESOURCE_EXHAUSTED = "resource_exhausted"

KIND_TYPE_ERROR = "TypeError-like"
KIND_REFERENCE_ERROR = "ReferenceError-like"
KIND_THROWN = "ThrownValue"
KIND_SYNTAX_ERROR = "SyntaxError-like"
KIND_GUARD_DENIED = "GuardDenied"
KIND_LIMIT = "LimitExceeded"

ERROR_KINDS = (
    KIND_TYPE_ERROR,
    KIND_REFERENCE_ERROR,
    KIND_THROWN,
    KIND_SYNTAX_ERROR,
    KIND_GUARD_DENIED,
    KIND_LIMIT,
)


class UnsupportedLanguage(Exception):
    pass


@dataclass(frozen=True)
class ActionCode:
    language_tag: str
    source: str

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.serialized.encode("utf-8")).hexdigest()

    @property
    def serialized(self) -> str:
        return f"{self.language_tag}:{self.source}"

    @classmethod
    def js(cls, source: str) -> "ActionCode":
        return cls("js", source)


@dataclass(frozen=True)
class ResourceLimits:
    wall_timeout_ms: int = DEFAULT_WALL_TIMEOUT_MS
    step_budget: int = DEFAULT_STEP_BUDGET
    output_budget: int = DEFAULT_OUTPUT_BUDGET

    def __post_init__(self):
        if self.wall_timeout_ms <= 0 or self.step_budget <= 0 or self.output_budget <= 0:
            raise ValueError("resource limits must be strictly positive")


@dataclass(frozen=True)
class ErrorReport:
    kind: str
    message: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message}


@dataclass
class ExecutionResult:
    status: str
    return_value: object = None
    has_return_value: bool = False
    console: list[str] = field(default_factory=list)
    error: ErrorReport | None = None
    state_diff: StateDiff = field(default_factory=lambda: StateDiff(entries=[]))
    duration_ms: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    def to_dict(self) -> dict:
        out: dict = {
            "status": self.status,
            "console": list(self.console),
            "state_diff": self.state_diff.to_list(),
            "duration_ms": self.duration_ms,
        }
        if self.has_return_value:
            out["return_value"] = self.return_value
        if self.error is not None:
            out["error"] = self.error.to_dict()
        return out


def normalize_error(exc: BaseException) -> ErrorReport:
    """Collapse interpreter failures into the closed (kind, message) set."""
    if isinstance(exc, jsparser.JsSyntaxError):
        return ErrorReport(KIND_SYNTAX_ERROR, str(exc))
    if isinstance(exc, JsRuntimeError):
        return ErrorReport(exc.kind, exc.message)
    if isinstance(exc, JsThrow):
        value = exc.value
        if isinstance(value, JsError):
            return ErrorReport(KIND_THROWN, value.message or value.name)
        return ErrorReport(KIND_THROWN, js_to_string(value))
    if isinstance(exc, GuardDeniedError):
        return ErrorReport(KIND_GUARD_DENIED, exc.reason)
    if isinstance(exc, LimitExceededError):
        return ErrorReport(KIND_LIMIT, exc.message)
    if isinstance(exc, (BreakSignal, ContinueSignal)):
        return ErrorReport(KIND_SYNTAX_ERROR, "break/continue outside of a loop")
    if isinstance(exc, ReturnSignal):
        return ErrorReport(KIND_SYNTAX_ERROR, "return outside of a function")
    raise exc  # infrastructure bug: never mask unknown failures


def _status_for(report: ErrorReport, exc: BaseException) -> str:
    if report.kind == KIND_GUARD_DENIED:
        return STATUS_DENIED
    if report.kind == KIND_LIMIT:
        if isinstance(exc, LimitExceededError) and exc.what == "wall":
            return STATUS_TIMEOUT
        return STATUS_RESOURCE_EXHAUSTED
    return STATUS_RUNTIME_ERROR


def execute(
    code: ActionCode,
    state: HostState,
    limits: ResourceLimits | None = None,
    guard=None,
) -> tuple[HostState, ExecutionResult]:
    """Run one script. Returns (post state, result); post == pre unless ok."""
    if code.language_tag != "js":
        raise UnsupportedLanguage(f"unsupported action-code language {code.language_tag!r}")
    limits = limits or ResourceLimits()
    started = time.monotonic()

    def elapsed_ms() -> float:
        return (time.monotonic() - started) * 1000.0

    try:
        program = jsparser.parse(code.source)
    except jsparser.JsSyntaxError as exc:
        report = normalize_error(exc)
        return state, ExecutionResult(
            status=STATUS_RUNTIME_ERROR, error=report, duration_ms=elapsed_ms()
        )

    working = copy_state(state)
    session = BridgeSession(working, guard)
    interp = Interpreter(
        session=session,
        step_budget=limits.step_budget,
        deadline=started + limits.wall_timeout_ms / 1000.0,
        output_budget=limits.output_budget,
    )
    try:
        completion = interp.run(program)
    except (
        JsRuntimeError,
        JsThrow,
        GuardDeniedError,
        LimitExceededError,
        BreakSignal,
        ContinueSignal,
        ReturnSignal,
    ) as exc:
        report = normalize_error(exc)
        return state, ExecutionResult(
            status=_status_for(report, exc),
            console=list(interp.console),
            error=report,
            duration_ms=elapsed_ms(),
        )
    value = to_jsonable(completion)
    return working, ExecutionResult(
        status=STATUS_OK,
        return_value=value,
        has_return_value=value is not None,
        console=list(interp.console),
        state_diff=diff(state, working),
        duration_ms=elapsed_ms(),
    )
