"""State model for the reference host application.

The host is a small desktop-style app with two facets: a music player with a
track library, and a tabbed markdown editor. Action code never touches these
dataclasses directly; it goes through the bridge surface (see bridge.py).

All state is plain data. Serialization is canonical (sorted keys, stable
indentation) so fixtures and snapshots are byte-stable and hashable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

SERIALIZATION_VERSION = 1

ROUTES = ("home", "library", "library/favorites", "library/history", "editor")
SEARCH_ROUTE_PREFIX = "search?q="

FONT_SIZE_MIN = 6
FONT_SIZE_MAX = 72


class InvalidState(Exception):
    """A structural invariant of the host state does not hold."""


def is_valid_route(route: str) -> bool:
    return route in ROUTES or route.startswith(SEARCH_ROUTE_PREFIX)


@dataclass
class Track:
    id: str
    title: str
    artist: str
    duration: int  # seconds, > 0


@dataclass
class PlayerState:
    volume: float = 0.5
    queue: list[str] = field(default_factory=list)
    current_index: int | None = None
    favorites: set[str] = field(default_factory=set)
    # (track id, logical timestamp); append-only between rollbacks
    history: list[tuple[str, int]] = field(default_factory=list)


@dataclass
class Document:
    id: str
    title: str
    paragraphs: list[str] = field(default_factory=list)
    font_size: int = 14


@dataclass
class EditorState:
    tabs: list[tuple[str, str]] = field(default_factory=list)  # (tab id, document id)
    active_tab: str = ""


@dataclass
class UiNode:
    id: str
    kind: str  # view | tab | button | list | item
    label: str
    route: str | None = None
    children: list["UiNode"] = field(default_factory=list)


@dataclass
class HostState:
    player: PlayerState
    library: dict[str, Track]
    editor: EditorState
    documents: dict[str, Document]
    current_route: str = "home"
    logical_clock: int = 0


def clamp_volume(value: float) -> float:
    return min(1.0, max(0.0, float(value)))


def clamp_font_size(value: float) -> int:
    return min(FONT_SIZE_MAX, max(FONT_SIZE_MIN, int(round(value))))


def active_document(state: HostState) -> Document:
    for tab_id, doc_id in state.editor.tabs:
        if tab_id == state.editor.active_tab:
            return state.documents[doc_id]
    raise InvalidState(f"active tab {state.editor.active_tab!r} not found")


def validate(state: HostState) -> None:
    """Raise InvalidState when any joint invariant is violated."""
    p = state.player
    if not 0.0 <= p.volume <= 1.0:
        raise InvalidState(f"volume {p.volume} outside [0, 1]")
    if p.current_index is not None and not 0 <= p.current_index < len(p.queue):
        raise InvalidState(f"current_index {p.current_index} not a queue index")
    for tid in p.queue:
        if tid not in state.library:
            raise InvalidState(f"queue references unknown track {tid!r}")
    for tid in p.favorites:
        if tid not in state.library:
            raise InvalidState(f"favorites references unknown track {tid!r}")
    for tid, _at in p.history:
        if tid not in state.library:
            raise InvalidState(f"history references unknown track {tid!r}")
    for track in state.library.values():
        if track.duration <= 0:
            raise InvalidState(f"track {track.id!r} has non-positive duration")
    ed = state.editor
    if not ed.tabs:
        raise InvalidState("editor must keep at least one tab")
    tab_ids = [t for t, _ in ed.tabs]
    if len(set(tab_ids)) != len(tab_ids):
        raise InvalidState("tab ids are not unique")
    if ed.active_tab not in tab_ids:
        raise InvalidState(f"active_tab {ed.active_tab!r} references no tab")
    for _tab_id, doc_id in ed.tabs:
        if doc_id not in state.documents:
            raise InvalidState(f"tab references unknown document {doc_id!r}")
    for doc in state.documents.values():
        if not FONT_SIZE_MIN <= doc.font_size <= FONT_SIZE_MAX:
            raise InvalidState(f"font_size {doc.font_size} outside [{FONT_SIZE_MIN}, {FONT_SIZE_MAX}]")
    if not is_valid_route(state.current_route):
        raise InvalidState(f"unknown route {state.current_route!r}")


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def state_to_dict(state: HostState) -> dict:
    """Plain-JSON projection with deterministic ordering of set-like fields."""
    return {
        "player": {
            "volume": state.player.volume,
            "queue": list(state.player.queue),
            "current_index": state.player.current_index,
            "favorites": sorted(state.player.favorites),
            "history": [[tid, at] for tid, at in state.player.history],
        },
        "library": {
            tid: {
                "id": t.id,
                "title": t.title,
                "artist": t.artist,
                "duration": t.duration,
            }
            for tid, t in sorted(state.library.items())
        },
        "editor": {
            "tabs": [[tab_id, doc_id] for tab_id, doc_id in state.editor.tabs],
            "active_tab": state.editor.active_tab,
        },
        "documents": {
            did: {
                "id": d.id,
                "title": d.title,
                "paragraphs": list(d.paragraphs),
                "font_size": d.font_size,
            }
            for did, d in sorted(state.documents.items())
        },
        "current_route": state.current_route,
        "logical_clock": state.logical_clock,
    }


def state_from_dict(data: dict) -> HostState:
    player = data["player"]
    state = HostState(
        player=PlayerState(
            volume=float(player["volume"]),
            queue=[str(t) for t in player["queue"]],
            current_index=player["current_index"],
            favorites={str(t) for t in player["favorites"]},
            history=[(str(tid), int(at)) for tid, at in player["history"]],
        ),
        library={
            tid: Track(id=t["id"], title=t["title"], artist=t["artist"], duration=int(t["duration"]))
            for tid, t in data["library"].items()
        },
        editor=EditorState(
            tabs=[(tab_id, doc_id) for tab_id, doc_id in data["editor"]["tabs"]],
            active_tab=data["editor"]["active_tab"],
        ),
        documents={
            did: Document(
                id=d["id"],
                title=d["title"],
                paragraphs=list(d["paragraphs"]),
                font_size=int(d["font_size"]),
            )
            for did, d in data["documents"].items()
        },
        current_route=data["current_route"],
        logical_clock=int(data["logical_clock"]),
    )
    return state


def canonical_json(payload: object) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def serialize_state(state: HostState) -> str:
    """Versioned canonical text form, used for fixtures and snapshots."""
    return canonical_json({"version": SERIALIZATION_VERSION, "state": state_to_dict(state)})


def deserialize_state(text: str) -> HostState:
    payload = json.loads(text)
    if payload.get("version") != SERIALIZATION_VERSION:
        raise InvalidState(f"unsupported serialization version {payload.get('version')!r}")
    return state_from_dict(payload["state"])


def state_hash(state: HostState) -> str:
    return hashlib.sha256(serialize_state(state).encode("utf-8")).hexdigest()


def states_equal(a: HostState, b: HostState) -> bool:
    return state_to_dict(a) == state_to_dict(b)


def copy_state(state: HostState) -> HostState:
    # round-trip through the dict form; cheaper than deepcopy and guarantees
    # the copy only carries serializable content
    return state_from_dict(state_to_dict(state))


def bump_clock(state: HostState) -> None:
    state.logical_clock += 1


def fresh_tab_id(state: HostState) -> str:
    taken = {t for t, _ in state.editor.tabs}
    n = 1
    while f"tab-{n}" in taken:
        n += 1
    return f"tab-{n}"


def fresh_document_id(state: HostState) -> str:
    n = 1
    while f"doc-{n}" in state.documents:
        n += 1
    return f"doc-{n}"


__all__ = [
    "Track",
    "PlayerState",
    "Document",
    "EditorState",
    "UiNode",
    "HostState",
    "InvalidState",
    "ROUTES",
    "SEARCH_ROUTE_PREFIX",
    "is_valid_route",
    "clamp_volume",
    "clamp_font_size",
    "active_document",
    "validate",
    "state_to_dict",
    "state_from_dict",
    "canonical_json",
    "serialize_state",
    "deserialize_state",
    "state_hash",
    "states_equal",
    "copy_state",
    "replace",
]
