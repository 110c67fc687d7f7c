from __future__ import annotations

import json

import pytest

from codeloop.hostapp.bridge import BridgeCall, INVOKE, WRITE, dispatch
from codeloop.hostapp.fixtures import init_fixture
from codeloop.hostapp.state import states_equal
from codeloop.statekeeper import StateKeeper, UnknownSnapshot


def test_snapshot_restore_round_trip(keeper):
    state = init_fixture("default")
    snap_id = keeper.take_snapshot(state, "s1", 0)
    restored = keeper.load_snapshot(snap_id).state()
    assert states_equal(restored, state)


def test_same_state_distinct_ids_equal_payloads(keeper):
    state = init_fixture("default")
    a = keeper.take_snapshot(state, "s1", 0)
    b = keeper.take_snapshot(state, "s1", 1)
    assert a != b
    assert keeper.load_snapshot(a).state_text == keeper.load_snapshot(b).state_text


def test_snapshot_then_mutate_then_rollback(keeper):
    state = init_fixture("default")
    snap_id = keeper.take_snapshot(state, "s1", 1)
    mutated, _ = dispatch(state, BridgeCall("app.player.volume", WRITE, [0.9]))
    mutated, _ = dispatch(mutated, BridgeCall("app.editor.openTab", INVOKE, ["X"]))
    restored = keeper.rollback(snap_id)
    assert states_equal(restored, state)
    assert not states_equal(restored, mutated)


def test_rollback_unknown_snapshot(keeper):
    with pytest.raises(UnknownSnapshot):
        keeper.rollback(999)


def test_rollback_emits_audit_entry(keeper):
    state = init_fixture("default")
    snap_id = keeper.take_snapshot(state, "s1", 1)
    keeper.rollback(snap_id, "s1")
    entries = keeper.read_audit()
    assert entries[-1].result_status == "rolled_back"
    assert entries[-1].snapshot_id == snap_id


def test_append_and_query_ordering(keeper):
    state = init_fixture("default")
    snap = keeper.take_snapshot(state, "a", 0)
    for i in range(3):
        keeper.append_audit("a", i, f"hash{i}", "Allow", "ok", snap, [])
    entries = keeper.read_audit()
    assert [e.seq for e in entries] == [1, 2, 3]
    assert [e.code_hash for e in entries] == ["hash0", "hash1", "hash2"]


def test_query_filters_by_session_and_range(keeper):
    state = init_fixture("default")
    snap = keeper.take_snapshot(state, "a", 0)
    for session in ("a", "b", "a"):
        keeper.append_audit(session, 1, "h", "Allow", "ok", snap, [])
    assert [e.session_id for e in keeper.query_audit(session_id="a")] == ["a", "a"]
    assert [e.seq for e in keeper.query_audit(seq_from=2, seq_to=3)] == [2, 3]


def test_entries_survive_process_restart(tmp_path):
    first = StateKeeper(tmp_path)
    state = init_fixture("default")
    snap = first.take_snapshot(state, "a", 0)
    first.append_audit("a", 1, "h1", "Allow", "ok", snap, [])
    before = [e.to_dict() for e in first.read_audit()]

    second = StateKeeper(tmp_path)  # fresh instance over the same directory
    after = [e.to_dict() for e in second.read_audit()]
    assert before == after
    # ids and seqs continue, never restart
    assert second.take_snapshot(state, "a", 1) == snap + 1
    entry = second.append_audit("a", 2, "h2", "Allow", "ok", snap, [])
    assert entry.seq == 2


def test_torn_final_line_is_ignored(tmp_path):
    keeper = StateKeeper(tmp_path)
    state = init_fixture("default")
    snap = keeper.take_snapshot(state, "a", 0)
    keeper.append_audit("a", 1, "h1", "Allow", "ok", snap, [])
    with open(keeper.audit_path, "a", encoding="utf-8") as fh:
        fh.write('{"seq": 2, "truncat')  # simulated crash mid-append
    entries = StateKeeper(tmp_path).read_audit()
    assert [e.seq for e in entries] == [1]


def test_gc_keeps_last_n(keeper):
    state = init_fixture("default")
    ids = [keeper.take_snapshot(state, "a", i) for i in range(5)]
    deleted = keeper.gc(keep_last=2)
    assert deleted == ids[:3]
    assert keeper.snapshot_ids() == ids[3:]
    # audit log untouched by gc
    keeper.rollback(ids[4])
    assert keeper.read_audit()[-1].result_status == "rolled_back"


def test_session_records_fold_and_recovery(tmp_path):
    keeper = StateKeeper(tmp_path)
    state = init_fixture("default")
    snap = keeper.take_snapshot(state, "sess1", 0)
    keeper.record_session_created("sess1", "do things", "default", snap)
    keeper.record_session_status("sess1", "running")
    keeper.record_session_created("sess2", "other", "default", snap)
    keeper.record_session_status("sess2", "succeeded")

    fresh = StateKeeper(tmp_path)
    interrupted = fresh.recover_interrupted_sessions()
    assert interrupted == ["sess1"]
    records = fresh.session_records()
    assert records["sess1"]["status"] == "failed"
    assert records["sess2"]["status"] == "succeeded"


def test_audit_lines_are_json_objects(keeper):
    state = init_fixture("default")
    snap = keeper.take_snapshot(state, "a", 0)
    keeper.append_audit("a", 1, "h", "Allow", "ok", snap, [{"path": "x", "after": 1}])
    with open(keeper.audit_path, encoding="utf-8") as fh:
        for line in fh:
            record = json.loads(line)
            assert set(record) == {
                "seq", "timestamp", "session_id", "iteration_index", "code_hash",
                "verdict_decision", "result_status", "snapshot_id", "state_diff",
            }
