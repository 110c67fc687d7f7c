"""Declarative task oracles: the benchmark's success predicates.

An oracle is a conjunction of clauses, one per line. Each clause is a boolean
expression over the final state, the initial (fixture) state, and the console
transcript:

    final player/volume > initial player/volume
    final player/volume - initial player/volume <= 0.2
    len(final editor/tabs) == len(initial editor/tabs) + 1
    final active_document/paragraphs == first(3, initial active_document/paragraphs)
    final active_document/paragraphs/1 == "**" + initial active_document/paragraphs/1 + "**"
    console contains "Play History"
    final current_route == "library/history" or final current_route == "library"

Paths address the serialized state dict with "/" separators; the virtual root
`active_document` resolves through the active editor tab. Evaluation is pure;
a clause referencing a missing path raises OraclePathError.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from codeloop.hostapp.state import HostState, state_to_dict


class OracleSyntaxError(Exception):
    pass


class OraclePathError(Exception):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>-?\d+(?:\.\d+)?)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<op>==|!=|<=|>=|<|>|\+|-|\(|\)|,)
  | (?P<word>[A-Za-z_][A-Za-z0-9_/.\-]*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"final", "initial", "len", "first", "console", "contains", "and", "or", "not", "true", "false"}


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise OracleSyntaxError(f"bad oracle syntax at {text[pos:pos + 20]!r}")
        pos = match.end()
        kind = match.lastgroup
        if kind == "ws":
            continue
        value = match.group()
        if kind == "word" and value in _KEYWORDS:
            tokens.append(("kw", value))
        else:
            tokens.append((kind, value))
    tokens.append(("eof", ""))
    return tokens


def resolve_path(state_dict: dict, path: str):
    """Walk a /-separated path; `active_document` resolves the active doc."""
    segments = path.split("/")
    if segments[0] == "active_document":
        editor = state_dict["editor"]
        doc_id = None
        for tab_id, did in editor["tabs"]:
            if tab_id == editor["active_tab"]:
                doc_id = did
        if doc_id is None:
            raise OraclePathError("no active document")
        node: object = state_dict["documents"][doc_id]
        segments = segments[1:]
    else:
        node = state_dict
    for seg in segments:
        if isinstance(node, dict):
            if seg not in node:
                raise OraclePathError(f"path {path!r}: no key {seg!r}")
            node = node[seg]
        elif isinstance(node, list):
            if not seg.lstrip("-").isdigit() or not 0 <= int(seg) < len(node):
                raise OraclePathError(f"path {path!r}: index {seg!r} out of range")
            node = node[int(seg)]
        else:
            raise OraclePathError(f"path {path!r}: {seg!r} applied to a scalar")
    return node


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        if tok[0] != "eof":
            self.i += 1
        return tok

    def eat(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        if tok[0] == kind and (value is None or tok[1] == value):
            self.next()
            return True
        return False

    def expect(self, kind: str, value: str | None = None):
        if not self.eat(kind, value):
            raise OracleSyntaxError(f"expected {value or kind!r}, found {self.peek()[1]!r}")

    def parse_clause(self):
        node = self.parse_or()
        if self.peek()[0] != "eof":
            raise OracleSyntaxError(f"unexpected trailing {self.peek()[1]!r}")
        return node

    def parse_or(self):
        node = self.parse_and()
        while self.eat("kw", "or"):
            node = ("or", node, self.parse_and())
        return node

    def parse_and(self):
        node = self.parse_not()
        while self.eat("kw", "and"):
            node = ("and", node, self.parse_not())
        return node

    def parse_not(self):
        if self.eat("kw", "not"):
            return ("not", self.parse_not())
        return self.parse_comparison()

    def parse_comparison(self):
        if self.peek() == ("kw", "console"):
            self.next()
            self.expect("kw", "contains")
            kind, raw = self.next()
            if kind != "string":
                raise OracleSyntaxError("console contains needs a string literal")
            return ("console", _unquote(raw))
        left = self.parse_sum()
        tok = self.peek()
        if tok[0] == "op" and tok[1] in ("==", "!=", "<", "<=", ">", ">="):
            self.next()
            right = self.parse_sum()
            return ("cmp", tok[1], left, right)
        return ("truthy", left)

    def parse_sum(self):
        node = self.parse_term()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in ("+", "-"):
                self.next()
                node = ("arith", tok[1], node, self.parse_term())
            else:
                return node

    def parse_term(self):
        kind, value = self.peek()
        if kind == "number":
            self.next()
            return ("num", float(value))
        if kind == "string":
            self.next()
            return ("str", _unquote(value))
        if kind == "kw" and value in ("true", "false"):
            self.next()
            return ("bool", value == "true")
        if kind == "kw" and value in ("final", "initial"):
            self.next()
            path_kind, path = self.next()
            if path_kind not in ("word",):
                raise OracleSyntaxError(f"expected a state path after {value!r}")
            return ("path", value, path)
        if kind == "kw" and value == "len":
            self.next()
            self.expect("op", "(")
            inner = self.parse_sum()
            self.expect("op", ")")
            return ("len", inner)
        if kind == "kw" and value == "first":
            self.next()
            self.expect("op", "(")
            count_kind, count = self.next()
            if count_kind != "number":
                raise OracleSyntaxError("first() needs a literal count")
            self.expect("op", ",")
            inner = self.parse_sum()
            self.expect("op", ")")
            return ("first", int(float(count)), inner)
        if kind == "op" and value == "(":
            self.next()
            inner = self.parse_or()
            self.expect("op", ")")
            return inner
        raise OracleSyntaxError(f"unexpected token {value!r}")


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    return body.replace('\\"', '"').replace("\\\\", "\\")


@dataclass(frozen=True)
class OracleContext:
    initial: dict
    final: dict
    transcript: tuple[str, ...]


def _eval(node, ctx: OracleContext):
    tag = node[0]
    if tag == "num" or tag == "str" or tag == "bool":
        return node[1]
    if tag == "path":
        source = ctx.final if node[1] == "final" else ctx.initial
        return resolve_path(source, node[2])
    if tag == "len":
        value = _eval(node[1], ctx)
        if not isinstance(value, (list, str, dict)):
            raise OraclePathError("len() needs a list, string, or object")
        return float(len(value))
    if tag == "first":
        value = _eval(node[2], ctx)
        if not isinstance(value, list):
            raise OraclePathError("first() needs a list")
        return value[: node[1]]
    if tag == "arith":
        left, right = _eval(node[2], ctx), _eval(node[3], ctx)
        if node[1] == "+":
            if isinstance(left, str) or isinstance(right, str):
                return _as_str(left) + _as_str(right)
            return _as_num(left) + _as_num(right)
        return _as_num(left) - _as_num(right)
    if tag == "cmp":
        op, left, right = node[1], _eval(node[2], ctx), _eval(node[3], ctx)
        if op == "==":
            return _eq(left, right)
        if op == "!=":
            return not _eq(left, right)
        ln, rn = _as_num(left), _as_num(right)
        return {"<": ln < rn, "<=": ln <= rn, ">": ln > rn, ">=": ln >= rn}[op]
    if tag == "console":
        return any(node[1] in line for line in ctx.transcript)
    if tag == "and":
        return bool(_eval(node[1], ctx)) and bool(_eval(node[2], ctx))
    if tag == "or":
        return bool(_eval(node[1], ctx)) or bool(_eval(node[2], ctx))
    if tag == "not":
        return not bool(_eval(node[1], ctx))
    if tag == "truthy":
        return bool(_eval(node[1], ctx))
    raise OracleSyntaxError(f"unknown node {tag!r}")  # pragma: no cover


def _as_num(value) -> float:
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    if isinstance(value, (int, float)):
        return float(value)
    raise OraclePathError(f"expected a number, got {value!r}")


def _as_str(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return f"{value:g}"
    raise OraclePathError(f"expected a string, got {value!r}")


def _eq(left, right) -> bool:
    if isinstance(left, bool) or isinstance(right, bool):
        return left is right
    if isinstance(left, (int, float)) and isinstance(right, (int, float)):
        return float(left) == float(right)
    return left == right


@dataclass(frozen=True)
class Oracle:
    """Compiled predicate: a conjunction of parsed clauses."""

    source: str
    clauses: tuple = ()

    @classmethod
    def compile(cls, source: str) -> "Oracle":
        clauses = []
        for line in source.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            clauses.append(_Parser(line).parse_clause())
        if not clauses:
            raise OracleSyntaxError("oracle has no clauses")
        return cls(source=source, clauses=tuple(clauses))

    def evaluate(self, initial: HostState, final: HostState, transcript: list[str]) -> bool:
        ctx = OracleContext(
            initial=state_to_dict(initial),
            final=state_to_dict(final),
            transcript=tuple(transcript),
        )
        return all(bool(_eval(clause, ctx)) for clause in self.clauses)
