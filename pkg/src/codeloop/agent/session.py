"""Session lifecycle and the multi-round generate/execute/repair loop.

One session owns one instruction, a host state, and an ordered list of
iteration records. Each step performs: retrieve context, build prompt, call
the model, parse, statically analyze, and (when allowed) execute under a
fresh pre-iteration snapshot, appending exactly one audit entry.

Pauses (approval, user feedback) are plain statuses; callers resume by
invoking run() again after approve()/feedback(). Terminal statuses are
absorbing.
"""

from __future__ import annotations

import hashlib
import uuid
from dataclasses import dataclass, field

from codeloop.agent import prompts
from codeloop.agent.protocol import (
    AgentResponse,
    NotPossible,
    ParseError,
    parse_response,
)
from codeloop.contextindex import Index, retrieve
from codeloop.hostapp.state import HostState, state_hash
from codeloop.llm import BudgetExceeded, CallBudget, ChatRequest
from codeloop.safety.analyzer import Verdict, analyze
from codeloop.safety.rules import (
    ALLOW,
    DENY,
    NEEDS_APPROVAL,
    RuleSet,
    make_guard,
    verification_rules,
)
from codeloop.sandbox.executor import ActionCode, ExecutionResult, ResourceLimits, execute
from codeloop.sandbox.parser import JsSyntaxError
from codeloop.statekeeper import StateKeeper

RUNNING = "running"
AWAITING_APPROVAL = "awaiting_approval"
AWAITING_USER = "awaiting_user"
SUCCEEDED = "succeeded"
FAILED = "failed"
ROLLED_BACK = "rolled_back"

TERMINAL = (SUCCEEDED, FAILED, ROLLED_BACK)

VERIFY_NONE = "none"
VERIFY_LLM = "llm"
VERIFY_ORACLE = "oracle"

VERIFY_PASS_TOKEN = "VERIFY:PASS"
VERIFY_FAIL_TOKEN = "VERIFY:FAIL"


class WrongState(Exception):
    pass


@dataclass
class AgentConfig:
    max_iterations: int = 5
    rollback_on_failure: bool = False
    auto_approve: bool = False
    verification: str = VERIFY_NONE
    history_budget_chars: int = 6000
    retrieval_k: int = 6
    limits: ResourceLimits = field(default_factory=ResourceLimits)
    max_llm_calls: int = 25
    model_name: str = "scripted"


@dataclass
class IterationRecord:
    index: int
    prompt_digest: str = ""
    raw_response_text: str | None = None
    response: AgentResponse | None = None
    parse_error: str | None = None
    verdict: Verdict | None = None
    result: ExecutionResult | None = None
    verification: tuple[str, bool] | None = None  # (code hash or "oracle", outcome)
    snapshot_id: int | None = None
    approval: bool | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "prompt_digest": self.prompt_digest,
            "response": self.response.to_dict() if self.response else None,
            "parse_error": self.parse_error,
            "verdict": self.verdict.to_dict() if self.verdict else None,
            "result": self.result.to_dict() if self.result else None,
            "verification": list(self.verification) if self.verification else None,
            "snapshot_id": self.snapshot_id,
            "approval": self.approval,
            "notes": list(self.notes),
        }


@dataclass
class Session:
    id: str
    instruction: str
    fixture_name: str
    state: HostState
    max_iterations: int
    pre_session_snapshot: int
    iterations: list[IterationRecord] = field(default_factory=list)
    status: str = RUNNING
    pending_code: ActionCode | None = None
    failure_reason: str | None = None
    salient: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "instruction": self.instruction,
            "fixture": self.fixture_name,
            "status": self.status,
            "iterations": [r.to_dict() for r in self.iterations],
            "pre_session_snapshot": self.pre_session_snapshot,
            "failure_reason": self.failure_reason,
            "salient": self.salient,
            "state_hash": state_hash(self.state),
        }


class AgentRunner:
    """Drives sessions against one provider / ruleset / statekeeper."""

    def __init__(
        self,
        provider,
        rules: RuleSet,
        keeper: StateKeeper,
        index: Index,
        config: AgentConfig | None = None,
        oracle=None,  # callable(Session) -> bool, used when verification == "oracle"
        verify_provider=None,  # optional second model for verification code
        on_event=None,  # callable(session, kind, payload)
        on_state_change=None,  # callable(session)
    ):
        self.provider = provider
        self.rules = rules
        self.keeper = keeper
        self.index = index
        self.config = config or AgentConfig()
        self.oracle = oracle
        self.verify_provider = verify_provider or provider
        self.on_event = on_event
        self.on_state_change = on_state_change
        self._budgets: dict[str, CallBudget] = {}

    # --- plumbing ---

    def emit(self, session: Session, kind: str, payload: dict) -> None:
        if self.on_event is not None:
            self.on_event(session, kind, payload)

    def _set_status(self, session: Session, status: str) -> None:
        if session.status == status:
            return
        session.status = status
        self.keeper.record_session_status(session.id, status)
        self.emit(session, "status_changed", {"status": status})

    def _budget(self, session: Session) -> CallBudget:
        if session.id not in self._budgets:
            self._budgets[session.id] = CallBudget(self.config.max_llm_calls)
        return self._budgets[session.id]

    # --- lifecycle ---

    def create_session(
        self,
        instruction: str,
        state: HostState,
        fixture_name: str = "",
        session_id: str | None = None,
        max_iterations: int | None = None,
    ) -> Session:
        if not instruction.strip():
            raise ValueError("instruction must be non-empty")
        sid = session_id or uuid.uuid4().hex[:12]
        snap = self.keeper.take_snapshot(state, sid, 0)
        session = Session(
            id=sid,
            instruction=instruction,
            fixture_name=fixture_name,
            state=state,
            max_iterations=max_iterations or self.config.max_iterations,
            pre_session_snapshot=snap,
        )
        self.keeper.record_session_created(sid, instruction, fixture_name, snap)
        return session

    # --- single round ---

    def step(self, session: Session) -> IterationRecord:
        if session.status != RUNNING:
            raise WrongState(f"cannot step a session in status {session.status}")
        if len(session.iterations) >= session.max_iterations:
            raise WrongState("iteration budget exhausted")
        record = IterationRecord(index=len(session.iterations) + 1)
        self.emit(session, "iteration_started", {"index": record.index})

        snippets = retrieve(self.index, session.instruction, self.config.retrieval_k)
        prompt = prompts.build_prompt(
            session.instruction,
            session.iterations,
            snippets,
            self.config.history_budget_chars,
        )
        record.prompt_digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()

        self._budget(session).spend()
        raw = self.provider.complete(
            ChatRequest(system="", messages=[("user", prompt)], model_name=self.config.model_name)
        )

        try:
            response = parse_response(raw)
        except ParseError as exc:
            record.raw_response_text = raw[:2000]
            record.parse_error = str(exc)
            session.iterations.append(record)
            self.emit(session, "response_parsed", {"index": record.index, "parse_error": str(exc)})
            return record

        record.response = response
        self.emit(session, "response_parsed", {"index": record.index, "response": response.to_dict()})

        if isinstance(response.action, NotPossible):
            session.iterations.append(record)
            self._fail(session, f"model declared the task not possible: {response.action.reasons}")
            return record

        code = response.action
        try:
            verdict = analyze(code, self.rules)
        except JsSyntaxError as exc:
            record.notes.append(f"error: SyntaxError-like: {exc}")
            session.iterations.append(record)
            self.emit(session, "verdict", {"index": record.index, "syntax_error": str(exc)})
            return record

        record.verdict = verdict
        self.emit(session, "verdict", {"index": record.index, "verdict": verdict.to_dict()})

        if verdict.decision == DENY:
            session.iterations.append(record)
            return record
        if verdict.decision == NEEDS_APPROVAL and not self.config.auto_approve:
            session.pending_code = code
            session.iterations.append(record)
            self._set_status(session, AWAITING_APPROVAL)
            return record

        approved = verdict.decision == NEEDS_APPROVAL
        if approved:
            record.approval = True
            record.notes.append("approval: granted automatically (benchmark policy)")
        session.iterations.append(record)
        self._execute(session, record, code, approved=approved)
        return record

    def _execute(self, session: Session, record: IterationRecord, code: ActionCode, approved: bool) -> None:
        snap = self.keeper.take_snapshot(session.state, session.id, record.index)
        record.snapshot_id = snap
        guard = make_guard(self.rules, approved=approved)
        new_state, result = execute(code, session.state, self.config.limits, guard)
        session.state = new_state
        record.result = result
        self.keeper.append_audit(
            session_id=session.id,
            iteration_index=record.index,
            code_hash=code.hash,
            verdict_decision=record.verdict.decision if record.verdict else "",
            result_status=result.status,
            snapshot_id=snap,
            state_diff=result.state_diff.to_list(),
        )
        self.emit(session, "execution_result", {"index": record.index, "result": result.to_dict()})
        if self.on_state_change is not None:
            self.on_state_change(session)

    # --- loop ---

    def run(self, session: Session) -> Session:
        while session.status == RUNNING:
            if len(session.iterations) >= session.max_iterations:
                self._fail(session, "iteration budget exhausted")
                break
            try:
                record = self.step(session)
            except BudgetExceeded as exc:
                self._fail(session, str(exc))
                break
            if session.status != RUNNING:
                break
            self._maybe_finish(session, record)
        return session

    def _maybe_finish(self, session: Session, record: IterationRecord) -> None:
        result = record.result
        response = record.response
        if result is None or response is None:
            return  # denied, protocol error, or syntax error: keep looping
        if not result.ok:
            return  # failed executions always continue, final_step or not
        if not response.final_step:
            return
        outcome = self._verify(session, record)
        if outcome is True:
            self._set_status(session, SUCCEEDED)
        elif outcome is False:
            if self.config.verification == VERIFY_ORACLE:
                session.salient = True
                self._fail(session, "execution reported ok but the task oracle is unsatisfied")
            else:
                record.notes.append(
                    "verification: FAIL (the task does not appear accomplished; "
                    "awaiting user confirmation or correction)"
                )
                self._set_status(session, AWAITING_USER)

    def _verify(self, session: Session, record: IterationRecord) -> bool | None:
        """True/False per the configured verification mode; None means none."""
        mode = self.config.verification
        if mode == VERIFY_NONE:
            return True
        if mode == VERIFY_ORACLE:
            if self.oracle is None:
                raise WrongState("oracle verification configured without an oracle")
            outcome = bool(self.oracle(session))
            record.verification = ("oracle", outcome)
            return outcome
        # LLM-generated verification code, read-only, never committed
        code = self.generate_verification(session)
        if code is None:
            record.verification = ("", False)
            return False
        guard = make_guard(verification_rules())
        _state, result = execute(code, session.state, self.config.limits, guard)
        outcome = False
        if result.ok:
            for line in result.console:
                if VERIFY_FAIL_TOKEN in line:
                    outcome = False
                elif VERIFY_PASS_TOKEN in line:
                    outcome = True
        record.verification = (code.hash, outcome)
        self.emit(
            session,
            "execution_result",
            {"index": record.index, "verification": {"outcome": outcome, "console": result.console}},
        )
        return outcome

    def generate_verification(self, session: Session) -> ActionCode | None:
        last = session.iterations[-1]
        if last.result is None or not last.result.ok or last.response is None:
            raise WrongState("verification requires a final ok execution")
        assert isinstance(last.response.action, ActionCode)
        snippets = retrieve(self.index, session.instruction, self.config.retrieval_k)
        prompt = prompts.build_verification_prompt(
            session.instruction,
            last.response.action.source,
            last.result.console,
            snippets,
            records=session.iterations,
            budget_chars=self.config.history_budget_chars,
        )
        self._budget(session).spend()
        raw = self.verify_provider.complete(
            ChatRequest(system="", messages=[("user", prompt)], model_name=self.config.model_name)
        )
        try:
            response = parse_response(raw)
        except ParseError:
            return None
        if not isinstance(response.action, ActionCode):
            return None
        return response.action

    # --- pauses ---

    def approve(self, session: Session, grant: bool) -> Session:
        if session.status != AWAITING_APPROVAL:
            raise WrongState(f"session is {session.status}, not awaiting approval")
        record = session.iterations[-1]
        code = session.pending_code
        session.pending_code = None
        record.approval = grant
        if not grant:
            record.notes.append(
                "approval: denied by the operator; choose a less destructive approach"
            )
            self._set_status(session, RUNNING)
            return session
        record.notes.append("approval: granted by the operator")
        self._set_status(session, RUNNING)
        assert code is not None
        self._execute(session, record, code, approved=True)
        if session.status == RUNNING:
            self._maybe_finish(session, record)
        return session

    def feedback(self, session: Session, text: str, accomplished: bool) -> Session:
        if session.status != AWAITING_USER:
            raise WrongState(f"session is {session.status}, not awaiting user feedback")
        record = session.iterations[-1]
        if accomplished:
            record.notes.append("user feedback: task confirmed accomplished")
            self._set_status(session, SUCCEEDED)
            return session
        record.notes.append(f"user feedback: {text}")
        self._set_status(session, RUNNING)
        return session

    # --- failure ---

    def _fail(self, session: Session, reason: str) -> None:
        session.failure_reason = reason
        if self.config.rollback_on_failure:
            restored = self.keeper.rollback(session.pre_session_snapshot, session.id)
            session.state = restored
            if self.on_state_change is not None:
                self.on_state_change(session)
        self._set_status(session, FAILED)
