from __future__ import annotations

import json
from importlib import resources

import pytest

from codeloop.agent.prompts import render_history
from codeloop.agent.session import (
    AWAITING_APPROVAL,
    AWAITING_USER,
    AgentConfig,
    AgentRunner,
    FAILED,
    RUNNING,
    SUCCEEDED,
    WrongState,
)
from codeloop.contextindex import load_default_index
from codeloop.hostapp.fixtures import init_fixture
from codeloop.hostapp.state import state_hash, states_equal
from codeloop.llm import ScriptEntry, ScriptTable, ScriptedProvider
from codeloop.safety.rules import load_rules
from codeloop.statekeeper import StateKeeper
from tests.conftest import default_rules_text


def resp(code: str, final: bool = True, thinking: str = "t") -> str:
    return json.dumps({"thinking": thinking, "action_code": f"js:{code}", "final_step": final})


def shipped_table() -> ScriptTable:
    return ScriptTable.from_json(
        resources.files("codeloop.data").joinpath("scripted/table2.json").read_text(encoding="utf-8")
    )


def make_runner(tmp_path, entries=None, table=None, config=None, rules_text=None, **kwargs):
    table = table or ScriptTable(entries=entries or [])
    rules = load_rules(rules_text if rules_text is not None else default_rules_text())
    keeper = StateKeeper(tmp_path / "data")
    runner = AgentRunner(
        ScriptedProvider(table), rules, keeper, load_default_index(), config, **kwargs
    )
    return runner, keeper


def test_three_round_volume_repair(tmp_path):
    runner, keeper = make_runner(tmp_path, table=shipped_table())
    session = runner.create_session("increase the volume slightly", init_fixture("default"), "default")
    runner.run(session)
    assert session.status == SUCCEEDED
    assert len(session.iterations) == 3
    it1, it2, it3 = session.iterations
    assert it1.result.status == "runtime_error"
    assert it1.result.error.kind in ("TypeError-like", "ReferenceError-like")
    assert "volume" in it1.result.error.message
    assert it2.result.status == "runtime_error"
    assert it2.result.error.kind == "ThrownValue"
    assert "Player component not found" in it2.result.error.message
    assert it3.result.status == "ok"
    assert abs(session.state.player.volume - 0.6) <= 1e-9
    # exactly one audit entry and one pre-execution snapshot per execution
    entries = keeper.query_audit(session_id=session.id)
    assert len(entries) == 3
    assert len({e.snapshot_id for e in entries}) == 3


def test_not_possible_fails_with_reasons(tmp_path):
    entries = [ScriptEntry(response=json.dumps(
        {"thinking": "", "action_code": "N/A:the app has no such feature", "final_step": True}
    ))]
    runner, _ = make_runner(tmp_path, entries=entries)
    session = runner.create_session("teleport me", init_fixture("default"))
    runner.run(session)
    assert session.status == FAILED
    assert "no such feature" in session.failure_reason


def test_needs_approval_pauses_without_executing(tmp_path):
    entries = [ScriptEntry(response=resp("app.editor.closeOtherTabs();"))]
    runner, keeper = make_runner(tmp_path, entries=entries)
    state = init_fixture("multi-tab")
    before_hash = state_hash(state)
    session = runner.create_session("Close all other tabs", state, "multi-tab")
    runner.run(session)
    assert session.status == AWAITING_APPROVAL
    assert session.iterations[-1].result is None
    assert state_hash(session.state) == before_hash
    # no execution -> no audit entry for the iteration
    assert keeper.query_audit(session_id=session.id) == []


def test_approval_grant_executes_and_succeeds(tmp_path):
    entries = [ScriptEntry(response=resp("app.editor.closeOtherTabs();"))]
    runner, keeper = make_runner(tmp_path, entries=entries)
    session = runner.create_session("Close all other tabs", init_fixture("multi-tab"), "multi-tab")
    runner.run(session)
    runner.approve(session, grant=True)
    assert session.status == SUCCEEDED
    assert len(session.state.editor.tabs) == 1
    record = session.iterations[-1]
    assert record.approval is True
    assert record.result.status == "ok"
    assert keeper.query_audit(session_id=session.id)[-1].result_status == "ok"


def test_approval_denial_feeds_history_and_continues(tmp_path):
    entries = [
        ScriptEntry(response=resp("app.editor.closeOtherTabs();"), iteration=1),
        ScriptEntry(response=resp("console.log('doing nothing destructive');")),
    ]
    runner, _ = make_runner(tmp_path, entries=entries)
    session = runner.create_session("Close all other tabs", init_fixture("multi-tab"), "multi-tab")
    runner.run(session)
    assert session.status == AWAITING_APPROVAL
    runner.approve(session, grant=False)
    assert session.status == RUNNING
    assert len(session.state.editor.tabs) == 3  # nothing executed
    history = render_history(session.iterations, 100_000)
    assert "denied by the operator" in history
    runner.run(session)
    assert session.status == SUCCEEDED


def test_denied_verdict_keeps_running_and_enters_history(tmp_path):
    entries = [
        ScriptEntry(response=resp("fetch('http://x');"), iteration=1),
        ScriptEntry(response=resp("console.log('ok');")),
    ]
    runner, _ = make_runner(tmp_path, entries=entries)
    state = init_fixture("default")
    session = runner.create_session("do something", state)
    record = runner.step(session)
    assert record.verdict.decision == "Deny"
    assert record.result is None
    assert session.status == RUNNING
    assert states_equal(session.state, state)
    prompt_history = render_history(session.iterations, 100_000)
    assert "verdict: Deny" in prompt_history
    runner.run(session)
    assert session.status == SUCCEEDED


def test_parse_error_is_recoverable(tmp_path):
    entries = [
        ScriptEntry(response="utter nonsense, no json here", iteration=1),
        ScriptEntry(response=resp("console.log('recovered');")),
    ]
    runner, _ = make_runner(tmp_path, entries=entries)
    session = runner.create_session("do something", init_fixture("default"))
    runner.run(session)
    assert session.status == SUCCEEDED
    assert session.iterations[0].parse_error is not None
    assert session.iterations[0].result is None
    assert len(session.iterations) == 2


def test_syntax_error_feeds_back(tmp_path):
    entries = [
        ScriptEntry(response=resp("let x = = 1;"), iteration=1),
        ScriptEntry(response=resp("console.log('fixed');")),
    ]
    runner, _ = make_runner(tmp_path, entries=entries)
    session = runner.create_session("do something", init_fixture("default"))
    runner.run(session)
    assert session.status == SUCCEEDED
    notes = session.iterations[0].notes
    assert any("SyntaxError-like" in n for n in notes)


def test_max_iterations_bounds_the_loop(tmp_path):
    entries = [ScriptEntry(response=resp("app.missing.thing = 1;", final=False))]
    config = AgentConfig(max_iterations=5)
    runner, _ = make_runner(tmp_path, entries=entries, config=config)
    session = runner.create_session("hopeless", init_fixture("default"))
    runner.run(session)
    assert session.status == FAILED
    assert len(session.iterations) == 5
    assert "iteration budget" in session.failure_reason


def test_failed_final_step_continues_loop(tmp_path):
    entries = [
        ScriptEntry(response=resp("app.missing.thing = 1;", final=True), iteration=1),
        ScriptEntry(response=resp("console.log('second chance');", final=True)),
    ]
    runner, _ = make_runner(tmp_path, entries=entries)
    session = runner.create_session("task", init_fixture("default"))
    runner.run(session)
    assert session.status == SUCCEEDED
    assert len(session.iterations) == 2


def test_llm_call_budget_fails_session(tmp_path):
    entries = [ScriptEntry(response=resp("app.missing.x = 1;", final=False))]
    config = AgentConfig(max_iterations=50, max_llm_calls=3)
    runner, _ = make_runner(tmp_path, entries=entries, config=config)
    session = runner.create_session("task", init_fixture("default"))
    runner.run(session)
    assert session.status == FAILED
    assert "budget" in session.failure_reason
    assert len(session.iterations) == 3


def test_rollback_on_failure_restores_pre_session_state(tmp_path):
    entries = [
        ScriptEntry(response=resp("app.player.volume = 0.9;", final=False), iteration=1),
        ScriptEntry(response=json.dumps(
            {"thinking": "", "action_code": "N/A:giving up", "final_step": True}
        )),
    ]
    config = AgentConfig(rollback_on_failure=True)
    runner, _ = make_runner(tmp_path, entries=entries, config=config)
    state = init_fixture("default")
    fixture_hash = state_hash(state)
    session = runner.create_session("task", state)
    runner.run(session)
    assert session.status == FAILED
    assert state_hash(session.state) == fixture_hash


def test_llm_verification_pass_succeeds(tmp_path):
    entries = [
        ScriptEntry(response=resp("app.editor.fontSize = app.editor.fontSize + 2;"),
                    instruction_contains="font size"),
        ScriptEntry(
            response=resp(
                "if (app.editor.fontSize === 16) { console.log('VERIFY:PASS'); } "
                "else { console.log('VERIFY:FAIL'); }"
            ),
            instruction_contains="verify:",
        ),
    ]
    # order matters: the verify entry must match first for verification prompts
    table = ScriptTable(entries=[entries[1], entries[0]])
    config = AgentConfig(verification="llm")
    runner, _ = make_runner(tmp_path, table=table, config=config)
    session = runner.create_session("Increase the font size by 2", init_fixture("default"), "default")
    runner.run(session)
    assert session.status == SUCCEEDED
    code_hash, outcome = session.iterations[-1].verification
    assert outcome is True
    assert code_hash


def test_llm_verification_failure_pauses_for_user(tmp_path):
    table = ScriptTable(entries=[
        ScriptEntry(response=resp("console.log('VERIFY:FAIL');"), instruction_contains="verify:"),
        ScriptEntry(response=resp("console.log('pretending to work');")),
    ])
    config = AgentConfig(verification="llm")
    runner, _ = make_runner(tmp_path, table=table, config=config)
    session = runner.create_session("Show my listening history", init_fixture("default"), "default")
    runner.run(session)
    assert session.status == AWAITING_USER
    assert session.iterations[-1].verification[1] is False
    assert any("verification: FAIL" in n for n in session.iterations[-1].notes)


def test_verification_script_writes_are_blocked(tmp_path):
    table = ScriptTable(entries=[
        ScriptEntry(
            response=resp("app.player.volume = 1; console.log('VERIFY:PASS');"),
            instruction_contains="verify:",
        ),
        ScriptEntry(response=resp("console.log('did the thing');")),
    ])
    config = AgentConfig(verification="llm")
    runner, _ = make_runner(tmp_path, table=table, config=config)
    state = init_fixture("default")
    session = runner.create_session("some task", state, "default")
    runner.run(session)
    # the cheating verification script is denied, so the outcome is false
    assert session.status == AWAITING_USER
    assert session.iterations[-1].verification[1] is False
    assert session.state.player.volume == 0.5  # write never committed


def test_user_feedback_accomplished_succeeds(tmp_path):
    table = ScriptTable(entries=[
        ScriptEntry(response=resp("console.log('VERIFY:FAIL');"), instruction_contains="verify:"),
        ScriptEntry(response=resp("app.ui.navigate('library');")),
    ])
    config = AgentConfig(verification="llm")
    runner, _ = make_runner(tmp_path, table=table, config=config)
    session = runner.create_session("Show my listening history", init_fixture("default"), "default")
    runner.run(session)
    assert session.status == AWAITING_USER
    runner.feedback(session, "looks right after all", accomplished=True)
    assert session.status == SUCCEEDED


def test_user_feedback_text_reenters_loop(tmp_path):
    table = ScriptTable(entries=[
        ScriptEntry(response=resp("console.log('VERIFY:FAIL');"), instruction_contains="verify:",
                    iteration=2),
        ScriptEntry(response=resp("console.log('VERIFY:PASS');"), instruction_contains="verify:"),
        ScriptEntry(response=resp("app.ui.navigate('library');"), iteration=1),
        ScriptEntry(response=resp("app.ui.navigate('library/history');"),
                    last_error_contains=""),
    ])
    config = AgentConfig(verification="llm")
    runner, _ = make_runner(tmp_path, table=table, config=config)
    session = runner.create_session("Show my listening history", init_fixture("default"), "default")
    runner.run(session)
    assert session.status == AWAITING_USER
    runner.feedback(session, "that opened the wrong view", accomplished=False)
    assert session.status == RUNNING
    history = render_history(session.iterations, 100_000)
    assert "that opened the wrong view" in history
    runner.run(session)
    assert session.status == SUCCEEDED
    assert session.state.current_route == "library/history"


def test_feedback_on_terminal_session_is_wrong_state(tmp_path):
    entries = [ScriptEntry(response=resp("console.log('done');"))]
    runner, _ = make_runner(tmp_path, entries=entries)
    session = runner.create_session("task", init_fixture("default"))
    runner.run(session)
    assert session.status == SUCCEEDED
    with pytest.raises(WrongState):
        runner.feedback(session, "anything", accomplished=False)
    with pytest.raises(WrongState):
        runner.approve(session, grant=True)


def test_scripted_sessions_are_reproducible(tmp_path):
    def run_once(subdir):
        runner, _ = make_runner(tmp_path / subdir, table=shipped_table())
        session = runner.create_session(
            "increase the volume slightly", init_fixture("default"), "default", session_id="fixed"
        )
        runner.run(session)
        trace = []
        for rec in session.iterations:
            trace.append((
                rec.index,
                rec.prompt_digest,
                rec.response.to_dict() if rec.response else None,
                rec.result.status if rec.result else None,
                tuple(rec.result.console) if rec.result else None,
            ))
        return trace, state_hash(session.state)

    first = run_once("a")
    second = run_once("b")
    assert first == second


def test_oracle_mode_failure_is_salient(tmp_path):
    entries = [ScriptEntry(response=resp("console.log('all good, trust me');"))]
    config = AgentConfig(verification="oracle", rollback_on_failure=False)
    runner, _ = make_runner(tmp_path, entries=entries, config=config,
                            oracle=lambda session: False)
    session = runner.create_session("task", init_fixture("default"))
    runner.run(session)
    assert session.status == FAILED
    assert session.salient is True


def test_events_emitted_in_order(tmp_path):
    events = []
    entries = [ScriptEntry(response=resp("console.log('x');"))]
    runner, _ = make_runner(
        tmp_path, entries=entries, on_event=lambda s, kind, payload: events.append(kind)
    )
    session = runner.create_session("task", init_fixture("default"))
    runner.run(session)
    assert events == ["iteration_started", "response_parsed", "verdict", "execution_result", "status_changed"]
