"""The code agent: protocol parsing, prompt assembly, session loop."""

from codeloop.agent.protocol import (
    AgentResponse,
    NotPossible,
    ParseError,
    parse_response,
    serialize_response,
)
from codeloop.agent.prompts import build_prompt, parse_prompt_fields
from codeloop.agent.session import (
    AgentConfig,
    AgentRunner,
    IterationRecord,
    Session,
    WrongState,
)

__all__ = [
    "AgentResponse",
    "NotPossible",
    "ParseError",
    "parse_response",
    "serialize_response",
    "build_prompt",
    "parse_prompt_fields",
    "AgentConfig",
    "AgentRunner",
    "IterationRecord",
    "Session",
    "WrongState",
]
