"""Acceptance suite: one test per primary criterion, run at stated tolerances.

Each test prints one ACCEPTANCE <name>: PASSED/FAILED line (see conftest).
"""

from __future__ import annotations

import json
import os
import random
import signal
import socket
import subprocess
import sys
import time
from importlib import resources

import httpx
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from codeloop.agent.session import AgentConfig, AgentRunner, SUCCEEDED
from codeloop.agent.protocol import (
    AgentResponse,
    NotPossible,
    parse_response,
    serialize_response,
)
from codeloop.bench.suite import (
    PASS,
    SALIENT_FAIL,
    NOT_POSSIBLE,
    parse_suite,
    run_benchmark,
    session_transcript,
    verify_task,
)
from codeloop.contextindex import load_default_index
from codeloop.hostapp.fixtures import init_fixture
from codeloop.hostapp.state import state_hash, states_equal
from codeloop.llm import (
    CassetteStore,
    RecordingProvider,
    ReplayProvider,
    ScriptEntry,
    ScriptTable,
    ScriptedProvider,
)
from codeloop.safety.analyzer import analyze
from codeloop.safety.rules import load_rules, make_guard
from codeloop.sandbox.executor import ActionCode, ResourceLimits, execute
from codeloop.statekeeper import StateKeeper
from tests.conftest import default_rules_text


def data_text(relpath: str) -> str:
    return resources.files("codeloop.data").joinpath(relpath).read_text(encoding="utf-8")


def shipped_table() -> ScriptTable:
    return ScriptTable.from_json(data_text("scripted/table2.json"))


def shipped_tasks():
    return parse_suite(data_text("suites/table2.tasks"))


def make_runner(tmp_path, provider, config=None):
    rules = load_rules(default_rules_text())
    keeper = StateKeeper(tmp_path / "data")
    return AgentRunner(provider, rules, keeper, load_default_index(), config), keeper


# --- criterion 1: Listing-1 replay ---------------------------------------------


def test_listing1_replay(tmp_path):
    started = time.monotonic()
    runner, keeper = make_runner(tmp_path, ScriptedProvider(shipped_table()))
    session = runner.create_session(
        "increase the volume slightly", init_fixture("default"), "default"
    )
    runner.run(session)
    elapsed = time.monotonic() - started

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
    assert elapsed < 1.0


# --- criterion 2: Listing-2 replay ---------------------------------------------


def test_listing2_replay(tmp_path):
    runner, _ = make_runner(tmp_path / "good", ScriptedProvider(shipped_table()))
    session = runner.create_session(
        "show my listening history", init_fixture("default"), "default"
    )
    runner.run(session)
    assert session.status == SUCCEEDED
    assert session.state.current_route == "library/history"
    # the successful trace navigates and then clicks (two ui invokes audited)
    transcript = session_transcript(session)
    assert "Play History tab not found." not in "".join(transcript)

    # variant: same instruction, but the script clicks index 5 of the home
    # view's 4-tab tree without navigating first
    salient_table = ScriptTable.from_json(data_text("scripted/listing2_salient.json"))
    runner2, _ = make_runner(tmp_path / "bad", ScriptedProvider(salient_table))
    session2 = runner2.create_session(
        "show my listening history", init_fixture("default"), "default"
    )
    runner2.run(session2)
    transcript2 = session_transcript(session2)
    assert any("Play History tab not found." in line for line in transcript2)
    task = next(t for t in shipped_tasks() if t.id == "show-history")
    verdict = verify_task(task, session2.state, transcript2, claimed_done=True)
    assert verdict == SALIENT_FAIL


# --- criterion 3: Table-2 suite ---------------------------------------------------


def test_table2_suite_oracle_provider(tmp_path):
    rules = load_rules(default_rules_text())
    started = time.monotonic()
    first = run_benchmark(shipped_tasks(), ScriptedProvider(shipped_table()), rules,
                          "scripted", data_dir=tmp_path / "r1")
    second = run_benchmark(shipped_tasks(), ScriptedProvider(shipped_table()), rules,
                           "scripted", data_dir=tmp_path / "r2")
    elapsed = time.monotonic() - started

    assert first.rate == "10/10"
    strip = lambda rep: [(r.task_id, r.verdict, r.iterations) for r in rep.results]
    assert strip(first) == strip(second)
    assert elapsed < 10.0


def test_table2_record_replay_classification(tmp_path):
    """Stand-in for live-model runs: with cassettes, the harness classifies
    every task pass / fail / salient_fail / not_possible with zero manual
    judgment, and salient failures are reported distinctly."""
    rules = load_rules(default_rules_text())
    # a "live-ish" provider: 8 good answers, one salient trajectory, one refusal
    mixed = ScriptTable(
        entries=[
            ScriptEntry(
                response=json.dumps(
                    {"thinking": "click the sixth tab here",
                     "action_code": "js:const tabs = app.ui.find('tab');\n"
                                    "if (tabs.length >= 6) { tabs[5].click(); } "
                                    "else { console.error('Play History tab not found.'); }",
                     "final_step": True}
                ),
                instruction_contains="listening history",
            ),
            ScriptEntry(
                response=json.dumps(
                    {"thinking": "", "action_code": "N/A:closing tabs is out of reach",
                     "final_step": True}
                ),
                instruction_contains="close all other tabs",
            ),
            *shipped_table().entries,
        ]
    )
    cassettes = CassetteStore(tmp_path / "cassettes")
    recorded = run_benchmark(
        shipped_tasks(), RecordingProvider(ScriptedProvider(mixed), cassettes), rules,
        "recorded", data_dir=tmp_path / "rec",
    )
    counts = recorded.counts()
    assert counts[PASS] == 8
    assert counts[SALIENT_FAIL] == 1
    assert counts[NOT_POSSIBLE] == 1

    replayed = run_benchmark(
        shipped_tasks(), ReplayProvider(cassettes), rules, "replayed",
        data_dir=tmp_path / "rep",
    )
    assert [(r.task_id, r.verdict) for r in replayed.results] == [
        (r.task_id, r.verdict) for r in recorded.results
    ]


# --- criterion 4: rollback identity -----------------------------------------------


def _random_mutation_script(rng: random.Random) -> str:
    lines = []
    for _ in range(rng.randint(1, 5)):
        pick = rng.randrange(7)
        if pick == 0:
            lines.append(f"app.player.volume = {rng.random():.4f};")
        elif pick == 1:
            lines.append(f"app.editor.fontSize = {rng.randint(4, 90)};")
        elif pick == 2:
            lines.append("app.player.next();")
        elif pick == 3:
            lines.append(f"app.editor.openTab('T{rng.randint(0, 999)}');")
        elif pick == 4:
            route = rng.choice(["home", "library", "library/history", "editor"])
            lines.append(f"app.ui.navigate('{route}');")
        elif pick == 5:
            paragraphs = json.dumps([f"p{rng.randint(0, 9)}" for _ in range(rng.randint(0, 4))])
            lines.append(f"app.editor.activeDocument.paragraphs = {paragraphs};")
        else:
            lines.append(f"app.library.search('{rng.choice(['rain', 'love', 'qqq'])}');")
    return "\n".join(lines)


def test_rollback_identity_100_scripts(tmp_path):
    keeper = StateKeeper(tmp_path / "data")
    rng = random.Random(20240811)
    state = init_fixture("default")
    started = time.monotonic()
    successes = 0
    for i in range(100):
        snap = keeper.take_snapshot(state, "prop", i)
        at_snapshot = state
        new_state, result = execute(ActionCode.js(_random_mutation_script(rng)), state)
        restored = keeper.rollback(snap)
        assert states_equal(restored, at_snapshot), f"script {i} broke rollback identity"
        successes += 1
        state = new_state  # keep mutating from wherever execution landed
    elapsed = time.monotonic() - started
    assert successes == 100
    assert elapsed < 5.0


# --- criterion 5: safety corpus ------------------------------------------------------


def _corpus(pathname: str) -> list[tuple[str, str]]:
    directory = resources.files("codeloop.data").joinpath(f"corpus/{pathname}")
    return sorted(
        ((f.name, f.read_text(encoding="utf-8")) for f in directory.iterdir()),
        key=lambda pair: pair[0],
    )


def test_safety_corpus(tmp_path):
    rules = load_rules(default_rules_text())
    state = init_fixture("multi-tab")
    limits = ResourceLimits(wall_timeout_ms=1000)

    violating = _corpus("violating")
    compliant = _corpus("compliant")
    assert len(violating) == 20
    assert len(compliant) == 20

    blocked = 0
    for name, source in violating:
        code = ActionCode.js(source)
        verdict = analyze(code, rules)
        if verdict.decision in ("Deny", "NeedsApproval"):
            blocked += 1  # never reaches execution without approval
            continue
        new_state, result = execute(code, state, limits, make_guard(rules))
        assert states_equal(new_state, state), f"{name} committed a mutation"
        if result.status == "denied":
            blocked += 1
    assert blocked == 20

    passed = 0
    for name, source in compliant:
        code = ActionCode.js(source)
        verdict = analyze(code, rules)
        assert verdict.decision == "Allow", f"{name} was blocked statically: {verdict.reasons}"
        _state, result = execute(code, state, limits, make_guard(rules))
        assert result.status == "ok", f"{name} failed: {result.status} {result.error}"
        passed += 1
    assert passed == 20


# --- criterion 6: resource limits -----------------------------------------------------


@pytest.mark.parametrize("source", ["while(true){}", "for (let i = 0; i < 100000000; i++) {}"])
def test_resource_limits(source):
    state = init_fixture("default")
    wall_ms = 500
    started = time.monotonic()
    new_state, result = execute(
        ActionCode.js(source), state, ResourceLimits(wall_timeout_ms=wall_ms)
    )
    elapsed_ms = (time.monotonic() - started) * 1000
    assert result.status in ("timeout", "resource_exhausted")
    assert elapsed_ms < 2 * wall_ms
    assert states_equal(new_state, state)


# --- criterion 7: protocol round trip ---------------------------------------------------


_TEXT = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=60)
_RESPONSES = st.builds(
    AgentResponse,
    thinking=_TEXT,
    action=st.one_of(
        _TEXT.map(lambda s: ActionCode("js", s)),
        _TEXT.map(NotPossible),
    ),
    final_step=st.booleans(),
)


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(_RESPONSES)
def test_protocol_round_trip(response):
    canonical = serialize_response(response)
    assert parse_response(canonical) == response
    fenced = f"```json\n{canonical}\n```"
    assert parse_response(fenced) == response
    prosed = f"Here is my response:\n{canonical}\nDone."
    assert parse_response(prosed) == response


# --- criterion 8: crash recovery ---------------------------------------------------------


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def _wait_http(url: str, timeout_s: float = 15.0) -> None:
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        try:
            httpx.get(url, timeout=1.0)
            return
        except httpx.HTTPError:
            time.sleep(0.1)
    raise AssertionError(f"service at {url} never came up")


def _serve(port: int, data_dir: str, delay_ms: float) -> subprocess.Popen:
    return subprocess.Popen(
        [
            sys.executable, "-m", "codeloop.cli", "serve",
            "--port", str(port),
            "--data-dir", data_dir,
            "--provider", "scripted",
            "--provider-delay-ms", str(delay_ms),
        ],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )


def test_crash_recovery(tmp_path):
    data_dir = str(tmp_path / "data")
    port = _free_port()
    base = f"http://127.0.0.1:{port}"
    server = _serve(port, data_dir, delay_ms=600)
    try:
        _wait_http(f"{base}/state")
        fixture_hash = state_hash(init_fixture("default"))
        assert httpx.get(f"{base}/state").json()["hash"] == fixture_hash

        created = httpx.post(
            f"{base}/sessions", json={"instruction": "increase the volume slightly"}, timeout=5.0
        )
        assert created.status_code == 201
        session_id = created.json()["id"]

        # wait until at least one iteration has been audited, then kill -9
        deadline = time.monotonic() + 10
        while time.monotonic() < deadline:
            entries = httpx.get(f"{base}/audit", params={"session": session_id}).json()["entries"]
            if entries:
                break
            time.sleep(0.05)
        assert entries, "no audited iteration before the crash"
        os.kill(server.pid, signal.SIGKILL)
        server.wait(timeout=10)
    finally:
        if server.poll() is None:
            server.kill()

    server2 = _serve(port, data_dir, delay_ms=0)
    try:
        _wait_http(f"{base}/state")
        # the interrupted session is failed on restart
        payload = httpx.get(f"{base}/sessions/{session_id}").json()
        assert payload["status"] == "failed"

        # audit log is prefix-consistent: parses cleanly, seqs strictly increase
        entries = httpx.get(f"{base}/audit").json()["entries"]
        seqs = [e["seq"] for e in entries]
        assert seqs == sorted(seqs) and len(set(seqs)) == len(seqs)

        # rollback to the pre-session snapshot restores the fixture hash
        fixture_hash = state_hash(init_fixture("default"))
        rolled = httpx.post(f"{base}/sessions/{session_id}/rollback", json={}, timeout=5.0)
        assert rolled.status_code == 200
        assert rolled.json()["state_hash"] == fixture_hash
        assert httpx.get(f"{base}/state").json()["hash"] == fixture_hash
    finally:
        server2.kill()
        server2.wait(timeout=10)
