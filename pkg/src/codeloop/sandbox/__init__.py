"""Guarded, budgeted execution of action code against the host bridge."""

from codeloop.sandbox.executor import (
    ActionCode,
    ERROR_KINDS,
    ErrorReport,
    ExecutionResult,
    ResourceLimits,
    STATUS_DENIED,
    STATUS_OK,
    STATUS_RESOURCE_EXHAUSTED,
    STATUS_RUNTIME_ERROR,
    STATUS_TIMEOUT,
    UnsupportedLanguage,
    execute,
    normalize_error,
)
from codeloop.sandbox.parser import JsSyntaxError, parse

__all__ = [
    "ActionCode",
    "ERROR_KINDS",
    "ErrorReport",
    "ExecutionResult",
    "ResourceLimits",
    "STATUS_DENIED",
    "STATUS_OK",
    "STATUS_RESOURCE_EXHAUSTED",
    "STATUS_RUNTIME_ERROR",
    "STATUS_TIMEOUT",
    "UnsupportedLanguage",
    "execute",
    "normalize_error",
    "JsSyntaxError",
    "parse",
]
