from __future__ import annotations

import json

from click.testing import CliRunner

from codeloop.cli import main
from codeloop.hostapp.fixtures import init_fixture
from codeloop.hostapp.state import state_hash
from codeloop.statekeeper import StateKeeper


def invoke(*args):
    return CliRunner().invoke(main, list(args))


def test_bench_default_suite_passes(tmp_path):
    out = tmp_path / "report.json"
    result = invoke("bench", "--data-dir", str(tmp_path / "bench"), "--out", str(out))
    assert result.exit_code == 0, result.output
    assert "10/10" in result.output
    payload = json.loads(out.read_text())
    assert payload["aggregate"] == "10/10"


def test_bench_refusing_provider_exits_nonzero(tmp_path):
    from importlib import resources

    table = resources.files("codeloop.data").joinpath("scripted/refuse_all.json")
    result = invoke("bench", "--script-table", str(table), "--data-dir", str(tmp_path))
    assert result.exit_code == 1
    assert "0/10" in result.output


def test_run_success_exit_zero(tmp_path):
    result = invoke("run", "--task", "Play the next song", "--data-dir", str(tmp_path))
    assert result.exit_code == 0, result.output
    assert "succeeded" in result.output
    assert "Now playing" in result.output


def test_run_failure_exit_one(tmp_path):
    result = invoke(
        "run", "--task", "Play the next song", "--data-dir", str(tmp_path),
        "--provider", "replay", "--cassette-dir", str(tmp_path / "empty-cassettes"),
    )
    assert result.exit_code == 1


def test_run_unknown_fixture_is_config_error(tmp_path):
    result = invoke("run", "--task", "x", "--fixture", "nope", "--data-dir", str(tmp_path))
    assert result.exit_code == 2


def test_replay_without_cassette_dir_is_config_error(tmp_path):
    result = invoke("run", "--task", "x", "--provider", "replay", "--data-dir", str(tmp_path))
    assert result.exit_code == 2


def test_rollback_and_audit_verbs(tmp_path):
    keeper = StateKeeper(tmp_path)
    state = init_fixture("default")
    snap = keeper.take_snapshot(state, "s1", 0)

    result = invoke("rollback", "--snapshot", str(snap), "--data-dir", str(tmp_path))
    assert result.exit_code == 0
    assert state_hash(state) in result.output

    missing = invoke("rollback", "--snapshot", "424242", "--data-dir", str(tmp_path))
    assert missing.exit_code == 1

    audit = invoke("audit", "--data-dir", str(tmp_path))
    assert audit.exit_code == 0
    lines = [json.loads(line) for line in audit.output.strip().splitlines()]
    assert lines[-1]["result_status"] == "rolled_back"

    filtered = invoke("audit", "--data-dir", str(tmp_path), "--session", "nope")
    assert filtered.output.strip() == ""


def test_gc_verb(tmp_path):
    keeper = StateKeeper(tmp_path)
    state = init_fixture("default")
    for i in range(4):
        keeper.take_snapshot(state, "s", i)
    result = invoke("gc", "--keep-last", "1", "--data-dir", str(tmp_path))
    assert result.exit_code == 0
    assert "deleted 3" in result.output
    assert len(StateKeeper(tmp_path).snapshot_ids()) == 1

    bad = invoke("gc", "--keep-last", "-1", "--data-dir", str(tmp_path))
    assert bad.exit_code == 2


def test_help_lists_all_verbs():
    result = invoke("--help")
    for verb in ("serve", "run", "bench", "rollback", "audit", "gc"):
        assert verb in result.output
