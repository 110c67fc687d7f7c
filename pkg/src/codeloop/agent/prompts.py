"""Prompt assembly for the code agent.

The canonical template lives at data/prompt_template.txt; build_prompt fills
in retrieved context snippets, the rendered HISTORY block, and the user
instruction (always last). Rendering is deterministic for a fixed session, so
scripted sessions are byte-reproducible.

When the rendered history exceeds the character budget, the oldest rounds are
collapsed to one-line summaries (status plus error kind), newest kept
verbatim; recency is what repair needs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from codeloop.contextindex import Snippet

_INSTRUCTION_RE = re.compile(
    r'Now generate the action code for this instruction: "(?P<instruction>.*)"\s*$',
    re.DOTALL,
)
_ROUND_HEADER = "### Round"
_HISTORY_OPEN = "<HISTORY>"
_HISTORY_CLOSE = "</HISTORY>"


def template_text() -> str:
    return resources.files("codeloop.data").joinpath("prompt_template.txt").read_text(encoding="utf-8")


def render_round(record) -> str:
    """Verbatim HISTORY block for one iteration record."""
    lines = [f"{_ROUND_HEADER} {record.index}"]
    if record.parse_error is not None:
        lines.append(f"response (unparseable): {record.raw_response_text or ''}".rstrip())
        lines.append(
            f"error: ProtocolError: {record.parse_error}. "
            "Reply with exactly one JSON object in the required format."
        )
    elif record.response is not None:
        from codeloop.agent.protocol import serialize_response

        lines.append(f"response: {serialize_response(record.response)}")
    if record.verdict is not None and record.verdict.decision != "Allow":
        reasons = "; ".join(reason for reason, _at in record.verdict.reasons)
        lines.append(f"verdict: {record.verdict.decision} ({reasons})")
    if record.result is not None:
        lines.append(f"result: status={record.result.status}")
        if record.result.error is not None:
            lines.append(f"error: {record.result.error.kind}: {record.result.error.message}")
        if record.result.console:
            lines.append("console:")
            lines.extend(f"  {line}" for line in record.result.console)
    for note in record.notes:
        lines.append(note)
    return "\n".join(lines)


def render_round_summary(record) -> str:
    status = "no-response"
    error_kind = ""
    if record.parse_error is not None:
        status = "protocol-error"
    elif record.result is not None:
        status = record.result.status
        if record.result.error is not None:
            error_kind = record.result.error.kind
    elif record.verdict is not None:
        status = f"verdict-{record.verdict.decision.lower()}"
    summary = f"{_ROUND_HEADER} {record.index} (summarized) status={status}"
    if error_kind:
        summary += f" error={error_kind}"
    return summary


def render_history(records: list, budget_chars: int) -> str:
    if not records:
        return "(no earlier rounds)"
    rendered = [render_round(r) for r in records]
    collapsed = 0
    while len("\n\n".join(rendered)) > budget_chars and collapsed < len(records) - 1:
        rendered[collapsed] = render_round_summary(records[collapsed])
        collapsed += 1
    return "\n\n".join(rendered)


def render_context(snippets: list[Snippet]) -> str:
    if not snippets:
        return "(no documentation retrieved)"
    return "\n\n".join(snippet.render() for snippet in snippets)


def build_prompt(instruction: str, records: list, snippets: list[Snippet], budget_chars: int = 6000) -> str:
    return template_text().format(
        context=render_context(snippets),
        history=render_history(records, budget_chars),
        instruction=instruction,
    )


def build_verification_prompt(
    instruction: str,
    action_source: str,
    console: list[str],
    snippets: list[Snippet],
    records: list = (),
    budget_chars: int = 6000,
) -> str:
    """Ask for a read-only script that prints VERIFY:PASS or VERIFY:FAIL."""
    check_brief = (
        "The action code below just ran with no runtime error. Write JavaScript "
        "verification code that checks, by reading app state only, whether the "
        "original instruction was actually accomplished. The verification code "
        "must not write any state and must finish with exactly one "
        "console.log of either 'VERIFY:PASS' or 'VERIFY:FAIL'.\n\n"
        f"Action code that ran:\n{action_source}\n\n"
        f"Its console output:\n" + ("\n".join(console) if console else "(none)")
    )
    return template_text().format(
        context=render_context(snippets) + "\n\n" + check_brief,
        history=render_history(list(records), budget_chars),
        instruction=f"verify: {instruction}",
    )


@dataclass(frozen=True)
class PromptFields:
    instruction: str
    iteration: int
    last_error: str


def parse_prompt_fields(prompt: str) -> PromptFields:
    """Recover (instruction, round index, last error text) from a prompt.

    This is how the scripted provider keys its table: it reads the same
    conversation a live model would.
    """
    match = _INSTRUCTION_RE.search(prompt)
    instruction = match.group("instruction") if match else ""
    open_idx = prompt.find(_HISTORY_OPEN)
    close_idx = prompt.rfind(_HISTORY_CLOSE)
    history = prompt[open_idx + len(_HISTORY_OPEN):close_idx] if 0 <= open_idx < close_idx else ""
    rounds = history.count(_ROUND_HEADER)
    last_error = ""
    last_chunk = history.split(_ROUND_HEADER)[-1] if rounds else ""
    for line in last_chunk.splitlines():
        stripped = line.strip()
        if stripped.startswith("error: "):
            last_error = stripped[len("error: "):]
        elif stripped.startswith("verdict: ") and not last_error:
            last_error = stripped[len("verdict: "):]
    return PromptFields(instruction=instruction, iteration=rounds + 1, last_error=last_error)
