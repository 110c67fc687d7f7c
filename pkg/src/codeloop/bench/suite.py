"""Task suite format, the benchmark runner, and report assembly.

Suite files hold one block per task:

    [task volume-slightly]
    instruction: Increase the volume slightly
    fixture: default
    multi_step: yes
    oracle:
      final player/volume > initial player/volume
      final player/volume - initial player/volume <= 0.2 or (final player/volume == 1 and initial player/volume > 0.8)

Benchmark policy per task: fresh fixture, rollback-on-failure on, approvals
auto-granted, the oracle predicate authoritative for success. Verdicts are
pass / fail / salient_fail / not_possible / error; salient_fail means the
session claimed completion but the oracle is unsatisfied.
"""

from __future__ import annotations

import json
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from codeloop.agent.session import (
    FAILED,
    SUCCEEDED,
    AgentConfig,
    AgentRunner,
    Session,
    VERIFY_ORACLE,
)
from codeloop.bench.oracle import Oracle, OraclePathError
from codeloop.contextindex import Index, load_default_index
from codeloop.hostapp.fixtures import init_fixture
from codeloop.hostapp.state import HostState
from codeloop.safety.rules import RuleSet
from codeloop.statekeeper import StateKeeper

PASS = "pass"
FAIL = "fail"
SALIENT_FAIL = "salient_fail"
NOT_POSSIBLE = "not_possible"
ERROR = "error"

VERDICTS = (PASS, FAIL, SALIENT_FAIL, NOT_POSSIBLE, ERROR)

_NOT_POSSIBLE_MARK = "model declared the task not possible"


class SuiteSyntaxError(Exception):
    pass


@dataclass(frozen=True)
class TaskSpec:
    id: str
    instruction: str
    fixture: str
    oracle_source: str
    expects_multi_step: bool = False

    def compiled_oracle(self) -> Oracle:
        return Oracle.compile(self.oracle_source)

    def to_block(self) -> str:
        lines = [
            f"[task {self.id}]",
            f"instruction: {self.instruction}",
            f"fixture: {self.fixture}",
            f"multi_step: {'yes' if self.expects_multi_step else 'no'}",
            "oracle:",
        ]
        lines += [f"  {line}" for line in self.oracle_source.splitlines() if line.strip()]
        return "\n".join(lines) + "\n"


def parse_suite(text: str) -> list[TaskSpec]:
    tasks: list[TaskSpec] = []
    current: dict | None = None
    oracle_lines: list[str] | None = None

    def finish() -> None:
        nonlocal current, oracle_lines
        if current is None:
            return
        missing = [k for k in ("instruction", "fixture", "oracle") if not current.get(k)]
        if missing:
            raise SuiteSyntaxError(f"task {current['id']!r} is missing {', '.join(missing)}")
        tasks.append(
            TaskSpec(
                id=current["id"],
                instruction=current["instruction"],
                fixture=current["fixture"],
                oracle_source=current["oracle"],
                expects_multi_step=current.get("multi_step", False),
            )
        )
        current, oracle_lines = None, None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[task ") and stripped.endswith("]"):
            finish()
            current = {"id": stripped[len("[task "):-1].strip()}
            oracle_lines = None
            continue
        if current is None:
            raise SuiteSyntaxError(f"line {lineno}: content before any [task ...] header")
        if oracle_lines is not None and (raw.startswith("  ") or raw.startswith("\t")):
            oracle_lines.append(stripped)
            current["oracle"] = "\n".join(oracle_lines)
            continue
        oracle_lines = None
        if ":" not in stripped:
            raise SuiteSyntaxError(f"line {lineno}: expected 'key: value'")
        key, _sep, value = stripped.partition(":")
        key, value = key.strip(), value.strip()
        if key == "instruction":
            current["instruction"] = value
        elif key == "fixture":
            current["fixture"] = value
        elif key == "multi_step":
            if value not in ("yes", "no"):
                raise SuiteSyntaxError(f"line {lineno}: multi_step must be yes or no")
            current["multi_step"] = value == "yes"
        elif key == "oracle":
            oracle_lines = [value] if value else []
            current["oracle"] = "\n".join(oracle_lines)
        else:
            raise SuiteSyntaxError(f"line {lineno}: unknown key {key!r}")
    finish()
    if not tasks:
        raise SuiteSyntaxError("suite defines no tasks")
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        raise SuiteSyntaxError("duplicate task ids")
    return tasks


def load_suite(path: str | Path) -> list[TaskSpec]:
    return parse_suite(Path(path).read_text(encoding="utf-8"))


def render_suite(tasks: list[TaskSpec]) -> str:
    return "\n".join(task.to_block() for task in tasks)


def verify_task(
    task: TaskSpec,
    final_state: HostState,
    transcript: list[str],
    claimed_done: bool = False,
) -> str:
    """Pure oracle evaluation → pass / fail / salient_fail."""
    initial = init_fixture(task.fixture)
    try:
        ok = task.compiled_oracle().evaluate(initial, final_state, transcript)
    except OraclePathError:
        raise
    if ok:
        return PASS
    return SALIENT_FAIL if claimed_done else FAIL


def session_transcript(session: Session) -> list[str]:
    lines: list[str] = []
    for record in session.iterations:
        if record.result is not None:
            lines.extend(record.result.console)
    return lines


@dataclass
class TaskResult:
    task_id: str
    instruction: str
    verdict: str
    iterations: int
    duration_s: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "instruction": self.instruction,
            "verdict": self.verdict,
            "iterations": self.iterations,
            "duration_s": round(self.duration_s, 4),
            "detail": self.detail,
        }


@dataclass
class BenchReport:
    provider_name: str
    results: list[TaskResult] = field(default_factory=list)

    @property
    def passes(self) -> int:
        return sum(1 for r in self.results if r.verdict == PASS)

    @property
    def rate(self) -> str:
        return f"{self.passes}/{len(self.results)}"

    def counts(self) -> dict[str, int]:
        out = {v: 0 for v in VERDICTS}
        for r in self.results:
            out[r.verdict] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "provider": self.provider_name,
            "aggregate": self.rate,
            "passes": self.passes,
            "total": len(self.results),
            "counts": self.counts(),
            "tasks": [r.to_dict() for r in self.results],
        }

    def render_table(self) -> str:
        width = max([len(r.instruction) for r in self.results] + [12])
        lines = [
            f"{'Task':<{width}}  {'Verdict':<13} {'Iter':>4}  {'Time':>7}",
            f"{'-' * width}  {'-' * 13} {'-' * 4}  {'-' * 7}",
        ]
        for r in self.results:
            lines.append(
                f"{r.instruction:<{width}}  {r.verdict:<13} {r.iterations:>4}  {r.duration_s:>6.2f}s"
            )
        lines.append("")
        lines.append(f"Completion rate ({self.provider_name}): {self.rate}")
        return "\n".join(lines)


def run_task(
    task: TaskSpec,
    provider,
    rules: RuleSet,
    index: Index | None = None,
    data_dir: str | Path | None = None,
    max_iterations: int = 5,
) -> TaskResult:
    """Run one task on a fresh fixture under benchmark policy."""
    started = time.monotonic()
    index = index or load_default_index()
    oracle = task.compiled_oracle()

    def oracle_fn(session: Session) -> bool:
        return oracle.evaluate(
            init_fixture(task.fixture), session.state, session_transcript(session)
        )

    def classify(session: Session) -> tuple[str, str]:
        if session.status == SUCCEEDED:
            return PASS, ""
        if session.salient:
            return SALIENT_FAIL, session.failure_reason or ""
        if session.status == FAILED and (session.failure_reason or "").startswith(_NOT_POSSIBLE_MARK):
            return NOT_POSSIBLE, session.failure_reason or ""
        return FAIL, session.failure_reason or session.status

    def execute_in(dirname: str) -> TaskResult:
        keeper = StateKeeper(dirname)
        config = AgentConfig(
            max_iterations=max_iterations,
            rollback_on_failure=True,
            auto_approve=True,
            verification=VERIFY_ORACLE,
        )
        runner = AgentRunner(provider, rules, keeper, index, config, oracle=oracle_fn)
        session = runner.create_session(task.instruction, init_fixture(task.fixture), task.fixture)
        try:
            runner.run(session)
        except Exception as exc:  # provider/storage failures become error verdicts
            return TaskResult(
                task_id=task.id,
                instruction=task.instruction,
                verdict=ERROR,
                iterations=len(session.iterations),
                duration_s=time.monotonic() - started,
                detail=f"{type(exc).__name__}: {exc}",
            )
        verdict, detail = classify(session)
        return TaskResult(
            task_id=task.id,
            instruction=task.instruction,
            verdict=verdict,
            iterations=len(session.iterations),
            duration_s=time.monotonic() - started,
            detail=detail,
        )

    if data_dir is not None:
        task_dir = Path(data_dir) / f"task-{task.id}"
        task_dir.mkdir(parents=True, exist_ok=True)
        return execute_in(str(task_dir))
    with tempfile.TemporaryDirectory(prefix=f"bench-{task.id}-") as tmp:
        return execute_in(tmp)


def run_benchmark(
    tasks: list[TaskSpec],
    provider,
    rules: RuleSet,
    provider_name: str = "scripted",
    parallelism: int = 1,
    data_dir: str | Path | None = None,
    max_iterations: int = 5,
) -> BenchReport:
    index = load_default_index()
    report = BenchReport(provider_name=provider_name)
    if parallelism <= 1:
        results = [run_task(t, provider, rules, index, data_dir, max_iterations) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = [
                pool.submit(run_task, t, provider, rules, index, data_dir, max_iterations)
                for t in tasks
            ]
            results = [f.result() for f in futures]
    report.results = results
    return report


def write_report(report: BenchReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
