"""Chat-completion providers: a generic HTTP client, a deterministic scripted
provider for tests and benchmark replays, and record/replay cassettes that
make live-provider integration tests reproducible after a single capture.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx


class TransportError(Exception):
    pass


class AuthError(Exception):
    pass


class BudgetExceeded(Exception):
    pass


class NoMatch(Exception):
    """No script-table entry matched; a test-authoring error, never recovered."""


class CassetteMiss(Exception):
    pass


@dataclass
class ChatRequest:
    system: str
    messages: list[tuple[str, str]]  # (role, text); roles: "user" | "model"
    model_name: str = "scripted"
    temperature: float = 0.0
    max_output: int = 2048

    def validate(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        last_role = None
        for role, _text in self.messages:
            if role not in ("user", "model"):
                raise ValueError(f"unknown role {role!r}")
            if role == "model" and last_role == "model":
                raise ValueError("two consecutive model turns")
            last_role = role

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "messages": [[role, text] for role, text in self.messages],
            "model_name": self.model_name,
            "temperature": self.temperature,
            "max_output": self.max_output,
        }

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        ).hexdigest()


class CallBudget:
    """Caller-side cap on provider calls (one per agent session)."""

    def __init__(self, max_calls: int):
        self.max_calls = max_calls
        self.used = 0

    def spend(self) -> None:
        self.used += 1
        if self.used > self.max_calls:
            raise BudgetExceeded(f"call budget of {self.max_calls} exceeded")


# ---------------------------------------------------------------------------
# Scripted provider
# ---------------------------------------------------------------------------


@dataclass
class ScriptEntry:
    response: str
    instruction_contains: str | None = None
    iteration: int | None = None
    last_error_contains: str | None = None

    def matches(self, instruction: str, iteration: int, last_error: str) -> bool:
        if self.instruction_contains is not None:
            if self.instruction_contains.lower() not in instruction.lower():
                return False
        if self.iteration is not None and self.iteration != iteration:
            return False
        if self.last_error_contains is not None:
            if self.last_error_contains.lower() not in last_error.lower():
                return False
        return True

    def to_dict(self) -> dict:
        out: dict = {"response": self.response}
        if self.instruction_contains is not None:
            out["instruction_contains"] = self.instruction_contains
        if self.iteration is not None:
            out["iteration"] = self.iteration
        if self.last_error_contains is not None:
            out["last_error_contains"] = self.last_error_contains
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScriptEntry":
        return cls(
            response=data["response"],
            instruction_contains=data.get("instruction_contains"),
            iteration=data.get("iteration"),
            last_error_contains=data.get("last_error_contains"),
        )


@dataclass
class ScriptTable:
    entries: list[ScriptEntry] = field(default_factory=list)

    def lookup(self, instruction: str, iteration: int, last_error: str) -> str:
        for entry in self.entries:
            if entry.matches(instruction, iteration, last_error):
                return entry.response
        raise NoMatch(
            f"no script entry for instruction={instruction!r} iteration={iteration} "
            f"last_error={last_error!r}"
        )

    def to_json(self) -> str:
        return json.dumps({"entries": [e.to_dict() for e in self.entries]}, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ScriptTable":
        data = json.loads(text)
        return cls(entries=[ScriptEntry.from_dict(e) for e in data["entries"]])

    @classmethod
    def load(cls, path: str | Path) -> "ScriptTable":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


class ScriptedProvider:
    """Replays canned responses; a pure function of the request."""

    def __init__(self, table: ScriptTable):
        self.table = table

    def complete(self, request: ChatRequest) -> str:
        from codeloop.agent.prompts import parse_prompt_fields

        request.validate()
        prompt = request.messages[-1][1] if request.messages else ""
        fields = parse_prompt_fields(prompt)
        return self.table.lookup(fields.instruction, fields.iteration, fields.last_error)


def scripted(table: ScriptTable) -> ScriptedProvider:
    return ScriptedProvider(table)


# ---------------------------------------------------------------------------
# HTTP provider (generic chat-completion wire shape)
# ---------------------------------------------------------------------------


@dataclass
class ProviderConfig:
    name: str = "generic"
    endpoint: str = ""
    model_name: str = ""
    api_key_env: str = "CODELOOP_API_KEY"
    max_retries: int = 3
    backoff_s: float = 0.5
    timeout_s: float = 60.0


class HttpChatProvider:
    """Minimal client for OpenAI-style chat-completion endpoints."""

    def __init__(self, config: ProviderConfig, client: httpx.Client | None = None):
        self.config = config
        self._client = client or httpx.Client(timeout=config.timeout_s)

    def _headers(self) -> dict:
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise AuthError(f"credential environment variable {self.config.api_key_env} is not set")
        return {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    def complete(self, request: ChatRequest) -> str:
        request.validate()
        body = {
            "model": request.model_name or self.config.model_name,
            "temperature": request.temperature,
            "max_tokens": request.max_output,
            "messages": [{"role": "system", "content": request.system}]
            + [
                {"role": "assistant" if role == "model" else "user", "content": text}
                for role, text in request.messages
            ],
        }
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            try:
                response = self._client.post(self.config.endpoint, json=body, headers=self._headers())
            except httpx.HTTPError as exc:
                last_error = exc
                time.sleep(self.config.backoff_s * (2**attempt))
                continue
            if response.status_code in (401, 403):
                raise AuthError(f"provider rejected credentials (HTTP {response.status_code})")
            if response.status_code >= 500 or response.status_code == 429:
                last_error = TransportError(f"HTTP {response.status_code}")
                time.sleep(self.config.backoff_s * (2**attempt))
                continue
            if response.status_code != 200:
                raise TransportError(f"unexpected HTTP {response.status_code}: {response.text[:200]}")
            payload = response.json()
            try:
                return payload["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"malformed provider response: {exc}") from exc
        raise TransportError(f"provider unreachable after {self.config.max_retries + 1} attempts: {last_error}")


# ---------------------------------------------------------------------------
# Record / replay cassettes
# ---------------------------------------------------------------------------


class CassetteStore:
    """Content-addressed request/response pairs on disk."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, request: ChatRequest) -> Path:
        return self.directory / f"{request.digest()}.json"

    def save(self, request: ChatRequest, response: str) -> None:
        payload = {"request": request.to_dict(), "response": response}
        self._path(request).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")

    def load(self, request: ChatRequest) -> str:
        path = self._path(request)
        if not path.exists():
            raise CassetteMiss(f"no cassette for request digest {request.digest()}")
        return json.loads(path.read_text(encoding="utf-8"))["response"]


class RecordingProvider:
    def __init__(self, inner, store: CassetteStore):
        self.inner = inner
        self.store = store

    def complete(self, request: ChatRequest) -> str:
        response = self.inner.complete(request)
        self.store.save(request, response)
        return response


class ReplayProvider:
    def __init__(self, store: CassetteStore):
        self.store = store

    def complete(self, request: ChatRequest) -> str:
        return self.store.load(request)


class DelayProvider:
    """Wraps a provider with a fixed pre-response delay (crash-drill knob)."""

    def __init__(self, inner, delay_ms: float):
        self.inner = inner
        self.delay_ms = delay_ms

    def complete(self, request: ChatRequest) -> str:
        time.sleep(self.delay_ms / 1000.0)
        return self.inner.complete(request)
