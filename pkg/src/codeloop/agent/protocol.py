"""The model-response protocol: a JSON object with keys `thinking`,
`action_code`, and `final_step`.

`action_code` is either "js:<source>" or "N/A:<reasons>" for tasks the model
declares impossible. Parsing tolerates code fences and surrounding prose by
extracting the first syntactically complete top-level JSON object; anything
less recoverable raises ParseError, which the agent loop feeds back to the
model as a correction request rather than failing the session.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from codeloop.sandbox.executor import ActionCode


class ParseError(Exception):
    pass


@dataclass(frozen=True)
class NotPossible:
    reasons: str


@dataclass
class AgentResponse:
    thinking: str
    action: ActionCode | NotPossible
    final_step: bool

    @property
    def is_action(self) -> bool:
        return isinstance(self.action, ActionCode)

    def action_code_field(self) -> str:
        if isinstance(self.action, ActionCode):
            return self.action.serialized
        return f"N/A:{self.action.reasons}"

    def to_dict(self) -> dict:
        return {
            "thinking": self.thinking,
            "action_code": self.action_code_field(),
            "final_step": self.final_step,
        }


def serialize_response(response: AgentResponse) -> str:
    """Canonical JSON form: fixed key order, no trailing whitespace."""
    return json.dumps(response.to_dict(), ensure_ascii=False)


def _strip_fences(text: str) -> str:
    stripped = text.strip()
    if stripped.startswith("```"):
        first_newline = stripped.find("\n")
        if first_newline != -1 and stripped.rstrip().endswith("```"):
            inner = stripped[first_newline + 1 :]
            return inner.rstrip().removesuffix("```")
    return text


def _extract_json_object(text: str) -> dict:
    decoder = json.JSONDecoder()
    pos = text.find("{")
    while pos != -1:
        try:
            obj, _end = decoder.raw_decode(text, pos)
        except ValueError:
            pos = text.find("{", pos + 1)
            continue
        if isinstance(obj, dict):
            return obj
        pos = text.find("{", pos + 1)
    raise ParseError("no JSON object found in model output")


def _coerce_final_step(value) -> bool:
    if isinstance(value, bool):
        return value
    if value == "true":
        return True
    if value == "false":
        return False
    raise ParseError(f"final_step must be a boolean, got {value!r}")


def parse_response(text: str) -> AgentResponse:
    obj = _extract_json_object(_strip_fences(text))
    if "action_code" not in obj:
        raise ParseError("response is missing the action_code key")
    if "final_step" not in obj:
        raise ParseError("response is missing the final_step key")
    raw_action = obj["action_code"]
    if not isinstance(raw_action, str):
        raise ParseError("action_code must be a string")
    thinking = obj.get("thinking", "")
    if not isinstance(thinking, str):
        raise ParseError("thinking must be a string")
    final_step = _coerce_final_step(obj["final_step"])
    if raw_action.startswith("js:"):
        action: ActionCode | NotPossible = ActionCode("js", raw_action[len("js:"):])
    elif raw_action.startswith("N/A:"):
        action = NotPossible(raw_action[len("N/A:"):])
    else:
        tag = raw_action.split(":", 1)[0]
        raise ParseError(f"unknown action_code tag {tag!r} (expected 'js:' or 'N/A:')")
    return AgentResponse(thinking=thinking, action=action, final_step=final_step)
