"""Keyword + one-hop-graph retrieval over the bridge-surface documentation.

The index is tiny (a few dozen symbols) so scoring is a linear scan: count of
query tokens overlapping each symbol's token bag, ties broken by path. The
top-k hits are then expanded one hop along hand-authored edges. Queries with
no overlap at all fall back to the highest-degree symbols.

The shipped symbol docs (data/bridge_docs.json) are generated from the bridge
registry; a build-check test asserts the file and the registry stay in sync.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from codeloop.hostapp.bridge import bridge_symbol_docs

STOP_WORDS = frozenset(
    """a an and are as at be by do for from how in into is it its me my of on
    or our over please s show that the their them then this to under up us
    was we what when where which with you your""".split()
)

_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")
_SPLIT_RE = re.compile(r"[^0-9a-zA-Z]+")

SYMBOL_KINDS = ("bridge-entry", "type", "route", "example")


class DuplicatePath(Exception):
    pass


def tokenize(text: str) -> frozenset[str]:
    """Lowercased keyword bag: splits on non-alphanumerics, camelCase, and
    underscores; drops stop words and single characters."""
    spaced = _CAMEL_RE.sub(" ", text)
    words = [w.lower() for w in _SPLIT_RE.split(spaced)]
    return frozenset(w for w in words if len(w) > 1 and w not in STOP_WORDS)


@dataclass
class IndexedSymbol:
    path: str
    kind: str
    doc: str
    tokens: frozenset[str]
    edges: tuple[str, ...]


@dataclass
class Index:
    symbols: dict[str, IndexedSymbol] = field(default_factory=dict)

    def degree(self, path: str) -> int:
        sym = self.symbols[path]
        inbound = sum(1 for other in self.symbols.values() if path in other.edges)
        return len(sym.edges) + inbound


@dataclass
class Snippet:
    path: str
    kind: str
    doc: str

    def render(self, max_lines: int = 40) -> str:
        lines = self.doc.splitlines() or [""]
        return f"{self.path} ({self.kind}):\n" + "\n".join(lines[:max_lines])


def build_index(docs: list[dict]) -> Index:
    """docs: [{path, kind, doc, edges}]; paths must be unique."""
    index = Index()
    for record in docs:
        path = record["path"]
        if path in index.symbols:
            raise DuplicatePath(f"duplicate symbol path {path!r}")
        tokens = tokenize(path) | tokenize(record["doc"])
        index.symbols[path] = IndexedSymbol(
            path=path,
            kind=record["kind"],
            doc=record["doc"],
            tokens=tokens,
            edges=tuple(record.get("edges", ())),
        )
    for sym in index.symbols.values():
        for edge in sym.edges:
            if edge not in index.symbols:
                raise DuplicatePath(f"symbol {sym.path!r} has edge to unknown {edge!r}")
    return index


def retrieve(index: Index, query: str, k: int = 6) -> list[Snippet]:
    """Top-k by keyword overlap, one-hop edge expansion, deterministic order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not index.symbols:
        return []
    query_tokens = tokenize(query)
    scored = sorted(
        index.symbols.values(),
        key=lambda s: (-len(query_tokens & s.tokens), s.path),
    )
    top = [s for s in scored[:k] if query_tokens & s.tokens]
    if not top:
        # no token overlap anywhere: fall back to the best-connected symbols
        fallback = sorted(index.symbols.values(), key=lambda s: (-index.degree(s.path), s.path))
        top = fallback[:k]
    result: list[IndexedSymbol] = []
    chosen: set[str] = set()
    for sym in top:
        if sym.path not in chosen:
            chosen.add(sym.path)
            result.append(sym)
    for sym in list(result):
        for edge in sym.edges:
            if edge not in chosen:
                chosen.add(edge)
                result.append(index.symbols[edge])
    return [Snippet(path=s.path, kind=s.kind, doc=s.doc) for s in result]


# ---------------------------------------------------------------------------
# Shipped index
# ---------------------------------------------------------------------------


def docs_file_text() -> str:
    return resources.files("codeloop.data").joinpath("bridge_docs.json").read_text(encoding="utf-8")


def render_docs_file() -> str:
    """Canonical content for data/bridge_docs.json, straight from the registry."""
    return json.dumps(bridge_symbol_docs(), indent=2, sort_keys=True) + "\n"


def write_docs_file(path: str | Path) -> None:
    Path(path).write_text(render_docs_file(), encoding="utf-8")


def load_default_index() -> Index:
    return build_index(json.loads(docs_file_text()))
