"""Command-line entry points.

    codeloop serve     start the agent service
    codeloop run       run one instruction locally and print the trace
    codeloop bench     run a task suite and report completion rates
    codeloop rollback  restore a snapshot from the data directory
    codeloop audit     print audit entries
    codeloop gc        prune old snapshots

Exit codes: 0 success / all pass, 1 any failure, 2 configuration error.
"""

from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

import click

from codeloop.agent.session import AgentConfig, AgentRunner, SUCCEEDED
from codeloop.bench.suite import load_suite, run_benchmark, write_report
from codeloop.contextindex import load_default_index
from codeloop.hostapp.fixtures import UnknownFixture, init_fixture
from codeloop.hostapp.state import serialize_state, state_hash
from codeloop.llm import NoMatch
from codeloop.safety.rules import RuleSyntaxError
from codeloop.service import DEFAULT_PORT, ServiceConfig, build_provider, create_app, load_service_rules
from codeloop.statekeeper import StateKeeper, UnknownSnapshot

CONFIG_ERROR = 2


def _service_config(**kwargs) -> ServiceConfig:
    try:
        return ServiceConfig(**{k: v for k, v in kwargs.items() if v is not None})
    except ValueError as exc:
        raise click.exceptions.Exit(CONFIG_ERROR) from exc


def _build(config: ServiceConfig):
    try:
        provider = build_provider(config)
        rules = load_service_rules(config)
    except (ValueError, OSError, RuleSyntaxError) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(CONFIG_ERROR)
    return provider, rules


@click.group()
def main() -> None:
    """Instruction-to-action-code agent for the reference host app."""


_provider_options = [
    click.option("--provider", default="scripted", show_default=True,
                 type=click.Choice(["scripted", "http", "replay"])),
    click.option("--script-table", default=None, help="Path to a scripted-provider table (JSON)."),
    click.option("--provider-endpoint", default=None, help="Chat-completion endpoint URL."),
    click.option("--provider-model", default=None, help="Model name for the HTTP provider."),
    click.option("--provider-api-key-env", default=None, help="Env var holding the API key."),
    click.option("--provider-delay-ms", default=None, type=float,
                 help="Artificial per-call delay (testing)."),
    click.option("--cassette-dir", default=None, help="Directory for record/replay cassettes."),
    click.option("--record", is_flag=True, default=False, help="Record provider responses."),
    click.option("--replay", is_flag=True, default=False, help="Replay recorded responses."),
]


def provider_options(fn):
    for option in reversed(_provider_options):
        fn = option(fn)
    return fn


@main.command()
@click.option("--port", default=DEFAULT_PORT, show_default=True, type=int)
@click.option("--data-dir", default="./codeloop-data", show_default=True)
@click.option("--rules", "rules_file", default=None, help="Rules file (default: packaged profile).")
@click.option("--fixture", default="default", show_default=True)
@click.option("--allow-raw-exec", is_flag=True, default=False,
              help="Enable POST /execute (off by default).")
@click.option("--max-iterations", default=5, show_default=True, type=int)
@provider_options
def serve(port, data_dir, rules_file, fixture, allow_raw_exec, max_iterations, **provider_kwargs):
    """Start the agent service."""
    import uvicorn

    config = _service_config(
        port=port,
        data_dir=data_dir,
        rules_file=rules_file,
        fixture=fixture,
        allow_raw_exec=allow_raw_exec,
        max_iterations=max_iterations,
        **provider_kwargs,
    )
    try:
        app = create_app(config)
    except (ValueError, OSError, RuleSyntaxError, UnknownFixture) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(CONFIG_ERROR)
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="warning")


@main.command()
@click.option("--task", "instruction", required=True, help="The instruction to execute.")
@click.option("--fixture", default="default", show_default=True)
@click.option("--data-dir", default="./codeloop-data", show_default=True)
@click.option("--rules", "rules_file", default=None)
@click.option("--max-iterations", default=5, show_default=True, type=int)
@click.option("--rollback-on-failure", is_flag=True, default=False)
@provider_options
def run(instruction, fixture, data_dir, rules_file, max_iterations, rollback_on_failure, **provider_kwargs):
    """Run one instruction locally and print the iteration trace."""
    config = _service_config(data_dir=data_dir, rules_file=rules_file, **provider_kwargs)
    provider, rules = _build(config)
    try:
        state = init_fixture(fixture)
    except UnknownFixture as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(CONFIG_ERROR)
    keeper = StateKeeper(config.data_dir)
    agent_config = AgentConfig(
        max_iterations=max_iterations, rollback_on_failure=rollback_on_failure
    )
    runner = AgentRunner(provider, rules, keeper, load_default_index(), agent_config)
    session = runner.create_session(instruction, state, fixture)
    try:
        runner.run(session)
    except NoMatch as exc:
        click.echo(f"scripted provider has no entry: {exc}", err=True)
        sys.exit(1)
    for record in session.iterations:
        click.echo(f"--- iteration {record.index} ---")
        if record.response is not None:
            click.echo(f"thinking: {record.response.thinking}")
            click.echo(f"code: {record.response.action_code_field()}")
        if record.parse_error is not None:
            click.echo(f"protocol error: {record.parse_error}")
        if record.verdict is not None:
            click.echo(f"verdict: {record.verdict.decision}")
        if record.result is not None:
            click.echo(f"status: {record.result.status}")
            if record.result.error is not None:
                click.echo(f"error: {record.result.error.kind}: {record.result.error.message}")
            for line in record.result.console:
                click.echo(f"console: {line}")
    click.echo(f"session {session.id}: {session.status}")
    if session.status == "awaiting_approval":
        click.echo("(approval flows require the service; run `codeloop serve`)")
    sys.exit(0 if session.status == SUCCEEDED else 1)


@main.command()
@click.option("--suite", default=None, help="Suite file (default: the packaged ten-task suite).")
@click.option("--data-dir", default=None, help="Keep per-task data dirs here (default: temp).")
@click.option("--rules", "rules_file", default=None)
@click.option("--parallelism", default=1, show_default=True, type=int)
@click.option("--max-iterations", default=5, show_default=True, type=int)
@click.option("--out", "out_path", default=None, help="Write the machine-readable report here.")
@provider_options
def bench(suite, data_dir, rules_file, parallelism, max_iterations, out_path, **provider_kwargs):
    """Run a task suite and print the completion-rate table."""
    config = _service_config(rules_file=rules_file, **provider_kwargs)
    provider, rules = _build(config)
    if suite is None:
        suite_text = resources.files("codeloop.data").joinpath("suites/table2.tasks").read_text(encoding="utf-8")
        from codeloop.bench.suite import parse_suite

        tasks = parse_suite(suite_text)
    else:
        try:
            tasks = load_suite(suite)
        except OSError as exc:
            click.echo(f"configuration error: {exc}", err=True)
            sys.exit(CONFIG_ERROR)
    report = run_benchmark(
        tasks,
        provider,
        rules,
        provider_name=config.provider,
        parallelism=parallelism,
        data_dir=data_dir,
        max_iterations=max_iterations,
    )
    click.echo(report.render_table())
    if out_path:
        write_report(report, out_path)
        click.echo(f"report written to {out_path}")
    sys.exit(0 if report.passes == len(report.results) else 1)


@main.command()
@click.option("--snapshot", "snapshot_id", required=True, type=int)
@click.option("--data-dir", default="./codeloop-data", show_default=True)
@click.option("--print-state", is_flag=True, default=False, help="Dump the restored state.")
def rollback(snapshot_id, data_dir, print_state):
    """Restore a snapshot and print its state hash (audited)."""
    keeper = StateKeeper(data_dir)
    try:
        state = keeper.rollback(snapshot_id)
    except UnknownSnapshot as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    click.echo(f"snapshot {snapshot_id} restored, state hash {state_hash(state)}")
    if print_state:
        click.echo(serialize_state(state), nl=False)
    sys.exit(0)


@main.command()
@click.option("--session", "session_id", default=None)
@click.option("--data-dir", default="./codeloop-data", show_default=True)
def audit(session_id, data_dir):
    """Print audit entries (optionally one session's)."""
    keeper = StateKeeper(data_dir)
    for entry in keeper.query_audit(session_id=session_id):
        click.echo(json.dumps(entry.to_dict(), sort_keys=True))
    sys.exit(0)


@main.command()
@click.option("--keep-last", required=True, type=int)
@click.option("--data-dir", default="./codeloop-data", show_default=True)
def gc(keep_last, data_dir):
    """Delete all but the newest N snapshots."""
    if keep_last < 0:
        click.echo("configuration error: --keep-last must be >= 0", err=True)
        sys.exit(CONFIG_ERROR)
    keeper = StateKeeper(data_dir)
    deleted = keeper.gc(keep_last)
    click.echo(f"deleted {len(deleted)} snapshot(s)")
    sys.exit(0)


if __name__ == "__main__":
    main()
