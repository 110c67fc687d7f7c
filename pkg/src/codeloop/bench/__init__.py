"""Benchmark harness: task suites, oracles, reports."""

from codeloop.bench.oracle import Oracle, OraclePathError, OracleSyntaxError
from codeloop.bench.suite import (
    BenchReport,
    ERROR,
    FAIL,
    NOT_POSSIBLE,
    PASS,
    SALIENT_FAIL,
    SuiteSyntaxError,
    TaskResult,
    TaskSpec,
    load_suite,
    parse_suite,
    render_suite,
    run_benchmark,
    run_task,
    session_transcript,
    verify_task,
    write_report,
)

__all__ = [
    "Oracle",
    "OraclePathError",
    "OracleSyntaxError",
    "BenchReport",
    "ERROR",
    "FAIL",
    "NOT_POSSIBLE",
    "PASS",
    "SALIENT_FAIL",
    "SuiteSyntaxError",
    "TaskResult",
    "TaskSpec",
    "load_suite",
    "parse_suite",
    "render_suite",
    "run_benchmark",
    "run_task",
    "session_transcript",
    "verify_task",
    "write_report",
]
