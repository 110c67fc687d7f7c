"""The bridge surface: every host capability reachable from action code.

Action code sees a single root object `app`. Each entry below is a path on
that root with a call kind (read, write, or invoke). The registry doubles as
the single source of truth for the context index's symbol docs and for the
guard's notion of "mutating".

dispatch() is the pure functional form used by tests and the service;
apply_call() is the in-place form the sandbox uses on its working copy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from codeloop.hostapp import uitree
from codeloop.hostapp.state import (
    Document,
    HostState,
    InvalidState,
    SEARCH_ROUTE_PREFIX,
    Track,
    bump_clock,
    clamp_font_size,
    clamp_volume,
    copy_state,
    active_document,
    fresh_document_id,
    fresh_tab_id,
    is_valid_route,
)

READ = "read"
WRITE = "write"
INVOKE = "invoke"


class BridgeError(Exception):
    """Base class for bridge-call failures."""


class UnknownPath(BridgeError):
    pass


class ArityError(BridgeError):
    pass


class ArgumentTypeError(BridgeError):
    pass


class DomainError(BridgeError):
    pass


@dataclass
class BridgeCall:
    path: str
    kind: str  # read | write | invoke
    args: list = field(default_factory=list)


@dataclass
class Entry:
    path: str
    kinds: tuple[str, ...]
    mutating: bool
    doc: str
    edges: tuple[str, ...] = ()


def _track_dict(track: Track) -> dict:
    return {"id": track.id, "title": track.title, "artist": track.artist, "duration": track.duration}


def _require_number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ArgumentTypeError(f"{what} must be a number, got {type(value).__name__}")
    return float(value)


def _require_string(value, what: str) -> str:
    if not isinstance(value, str):
        raise ArgumentTypeError(f"{what} must be a string, got {type(value).__name__}")
    return value


# --- player ---------------------------------------------------------------


def _read_volume(state: HostState) -> float:
    return state.player.volume


def _write_volume(state: HostState, value) -> float:
    vol = clamp_volume(_require_number(value, "volume"))
    state.player.volume = vol
    bump_clock(state)
    return vol


def _advance(state: HostState, step: int) -> dict:
    player = state.player
    if not player.queue:
        raise DomainError("the queue is empty")
    if player.current_index is None:
        player.current_index = 0 if step > 0 else len(player.queue) - 1
    else:
        player.current_index = (player.current_index + step) % len(player.queue)
    bump_clock(state)
    track_id = player.queue[player.current_index]
    player.history.append((track_id, state.logical_clock))
    return _track_dict(state.library[track_id])


def _read_current_track(state: HostState):
    player = state.player
    if player.current_index is None:
        return None
    return _track_dict(state.library[player.queue[player.current_index]])


def _read_queue(state: HostState) -> list:
    return [_track_dict(state.library[tid]) for tid in state.player.queue]


# --- library ---------------------------------------------------------------


def _favorites(state: HostState) -> list:
    return [_track_dict(state.library[tid]) for tid in sorted(state.player.favorites)]


def _history(state: HostState) -> list:
    return [
        {"track": _track_dict(state.library[tid]), "timestamp": at}
        for tid, at in state.player.history
    ]


def _search(state: HostState, query) -> list:
    q = _require_string(query, "search query").lower()
    matches = [
        _track_dict(t)
        for _tid, t in sorted(state.library.items())
        if q in t.title.lower() or q in t.artist.lower()
    ]
    state.current_route = SEARCH_ROUTE_PREFIX + str(query)
    bump_clock(state)
    return matches


# --- editor ----------------------------------------------------------------


def _read_tabs(state: HostState) -> list:
    return [
        {"id": tab_id, "documentId": doc_id, "title": state.documents[doc_id].title}
        for tab_id, doc_id in state.editor.tabs
    ]


def _read_active_tab(state: HostState) -> str:
    return state.editor.active_tab


def _open_tab(state: HostState, title=None, paragraphs=None) -> str:
    if title is None:
        title = "Untitled"
    title = _require_string(title, "title")
    if paragraphs is None:
        paragraphs = []
    if not isinstance(paragraphs, list) or not all(isinstance(p, str) for p in paragraphs):
        raise ArgumentTypeError("paragraphs must be a list of strings")
    doc_id = fresh_document_id(state)
    tab_id = fresh_tab_id(state)
    state.documents[doc_id] = Document(id=doc_id, title=title, paragraphs=list(paragraphs))
    state.editor.tabs.append((tab_id, doc_id))
    state.editor.active_tab = tab_id
    bump_clock(state)
    return tab_id


def _drop_orphan_document(state: HostState, doc_id: str) -> None:
    if all(d != doc_id for _t, d in state.editor.tabs):
        state.documents.pop(doc_id, None)


def _close_tab(state: HostState, tab_id) -> int:
    tab_id = _require_string(tab_id, "tab id")
    tabs = state.editor.tabs
    if len(tabs) == 1:
        raise DomainError("cannot close last tab")
    for i, (tid, doc_id) in enumerate(tabs):
        if tid == tab_id:
            tabs.pop(i)
            _drop_orphan_document(state, doc_id)
            if state.editor.active_tab == tab_id:
                state.editor.active_tab = tabs[min(i, len(tabs) - 1)][0]
            bump_clock(state)
            return len(tabs)
    raise DomainError(f"no tab with id {tab_id!r}")


def _close_other_tabs(state: HostState) -> int:
    tabs = state.editor.tabs
    active = state.editor.active_tab
    closed = [(t, d) for t, d in tabs if t != active]
    if not closed:
        return 0
    state.editor.tabs = [(t, d) for t, d in tabs if t == active]
    for _t, doc_id in closed:
        _drop_orphan_document(state, doc_id)
    bump_clock(state)
    return len(closed)


def _read_font_size(state: HostState) -> int:
    return active_document(state).font_size


def _write_font_size(state: HostState, value) -> int:
    size = clamp_font_size(_require_number(value, "fontSize"))
    active_document(state).font_size = size
    bump_clock(state)
    return size


def _read_paragraphs(state: HostState) -> list:
    return list(active_document(state).paragraphs)


def _write_paragraphs(state: HostState, value) -> list:
    if not isinstance(value, list) or not all(isinstance(p, str) for p in value):
        raise ArgumentTypeError("paragraphs must be a list of strings")
    active_document(state).paragraphs = list(value)
    bump_clock(state)
    return list(value)


# --- ui ----------------------------------------------------------------------


def _navigate(state: HostState, route) -> str:
    route = _require_string(route, "route")
    if not is_valid_route(route):
        raise DomainError(f"unknown route {route!r}")
    state.current_route = route
    bump_clock(state)
    return route


def _current_route(state: HostState) -> str:
    return state.current_route


def _find(state: HostState, query) -> list:
    query = _require_string(query, "query")
    return [uitree.node_handle_dict(n) for n in uitree.find_nodes(state, query)]


def _click(state: HostState, node_id):
    node_id = _require_string(node_id, "node id")
    node = uitree.find_node_by_id(state, node_id)
    if node is None:
        raise DomainError(f"no ui node with id {node_id!r}")
    if node.route is not None:
        return _navigate(state, node.route)
    return None


# --- registry ----------------------------------------------------------------

_READERS: dict[str, Callable] = {
    "app.player.volume": _read_volume,
    "app.player.currentTrack": _read_current_track,
    "app.player.queue": _read_queue,
    "app.editor.tabs": _read_tabs,
    "app.editor.activeTab": _read_active_tab,
    "app.editor.fontSize": _read_font_size,
    "app.editor.activeDocument.paragraphs": _read_paragraphs,
    "app.ui.currentRoute": _current_route,
}

_WRITERS: dict[str, Callable] = {
    "app.player.volume": _write_volume,
    "app.editor.fontSize": _write_font_size,
    "app.editor.activeDocument.paragraphs": _write_paragraphs,
}

# name -> (handler, min arity, max arity)
_INVOKERS: dict[str, tuple[Callable, int, int]] = {
    "app.player.next": (lambda s: _advance(s, 1), 0, 0),
    "app.player.previous": (lambda s: _advance(s, -1), 0, 0),
    "app.library.favorites": (_favorites, 0, 0),
    "app.library.history": (_history, 0, 0),
    "app.library.search": (_search, 1, 1),
    "app.editor.openTab": (_open_tab, 0, 2),
    "app.editor.closeTab": (_close_tab, 1, 1),
    "app.editor.closeOtherTabs": (_close_other_tabs, 0, 0),
    "app.ui.navigate": (_navigate, 1, 1),
    "app.ui.find": (_find, 1, 1),
    "app.ui.click": (_click, 1, 1),
}

MUTATING_PATHS = frozenset(
    {
        "app.player.volume",
        "app.editor.fontSize",
        "app.editor.activeDocument.paragraphs",
        "app.player.next",
        "app.player.previous",
        "app.library.search",
        "app.editor.openTab",
        "app.editor.closeTab",
        "app.editor.closeOtherTabs",
        "app.ui.navigate",
        "app.ui.click",
    }
)

NAMESPACES = frozenset(
    {"app", "app.player", "app.library", "app.editor", "app.editor.activeDocument", "app.ui"}
)

SURFACE: dict[str, Entry] = {}


def _register(path: str, kinds: tuple[str, ...], doc: str, edges: tuple[str, ...] = ()) -> None:
    SURFACE[path] = Entry(path=path, kinds=kinds, mutating=path in MUTATING_PATHS, doc=doc, edges=edges)


_register(
    "app.player.volume",
    (READ, WRITE),
    "Playback volume as a fraction between 0 and 1. Reads return the current "
    "value; writes clamp into [0, 1] and return the stored value.",
    ("app.player.currentTrack",),
)
_register(
    "app.player.next",
    (INVOKE,),
    "Advance playback to the next track in the queue (wraps at the end), "
    "append it to the listening history, and return the new current track.",
    ("app.player.queue", "app.player.currentTrack"),
)
_register(
    "app.player.previous",
    (INVOKE,),
    "Step playback back to the previous queue track (wraps at the start), "
    "append it to the listening history, and return the new current track.",
    ("app.player.queue", "app.player.currentTrack"),
)
_register(
    "app.player.currentTrack",
    (READ,),
    "The track object currently playing ({id, title, artist, duration}), or "
    "null when nothing is selected.",
    ("app.player.queue",),
)
_register(
    "app.player.queue",
    (READ,),
    "The play queue as an array of track objects in play order.",
    ("app.player.next",),
)
_register(
    "app.library.favorites",
    (INVOKE,),
    "Return the tracks marked as favorites, as an array of track objects.",
    ("app.ui.navigate",),
)
_register(
    "app.library.history",
    (INVOKE,),
    "Return the listening history: an array of {track, timestamp} entries in "
    "chronological order.",
    ("app.ui.navigate",),
)
_register(
    "app.library.search",
    (INVOKE,),
    "search(q): case-insensitive substring search over track titles and "
    "artists. Returns matching track objects and navigates to 'search?q=<q>'.",
    ("app.ui.currentRoute",),
)
_register(
    "app.editor.tabs",
    (READ,),
    "Open editor tabs as an array of {id, documentId, title}.",
    ("app.editor.activeTab", "app.editor.openTab"),
)
_register(
    "app.editor.activeTab",
    (READ,),
    "The id of the currently active editor tab.",
    ("app.editor.tabs",),
)
_register(
    "app.editor.openTab",
    (INVOKE,),
    "openTab(title?, paragraphs?): open a new tab holding a fresh document "
    "(optionally titled and pre-filled with paragraphs). The new tab becomes "
    "active. Returns the new tab id.",
    ("app.editor.tabs", "app.editor.activeDocument.paragraphs"),
)
_register(
    "app.editor.closeTab",
    (INVOKE,),
    "closeTab(id): close the given tab. Fails on the last remaining tab. "
    "Returns the number of tabs left.",
    ("app.editor.tabs",),
)
_register(
    "app.editor.closeOtherTabs",
    (INVOKE,),
    "Close every tab except the active one. Returns the number closed.",
    ("app.editor.tabs", "app.editor.activeTab"),
)
_register(
    "app.editor.fontSize",
    (READ, WRITE),
    "Font size of the active document in points. Writes round to an integer "
    "and clamp into [6, 72].",
    ("app.editor.activeDocument.paragraphs",),
)
_register(
    "app.editor.activeDocument.paragraphs",
    (READ, WRITE),
    "The active document's paragraphs as an array of strings. Reads return a "
    "copy; writes replace the whole array.",
    ("app.editor.fontSize", "app.editor.tabs"),
)
_register(
    "app.ui.navigate",
    (INVOKE,),
    "navigate(route): switch the app to one of the routes 'home', 'library', "
    "'library/favorites', 'library/history', 'editor', or 'search?q=<text>'.",
    ("app.ui.currentRoute",),
)
_register(
    "app.ui.currentRoute",
    (READ,),
    "The route the app is currently showing.",
    ("app.ui.navigate",),
)
_register(
    "app.ui.find",
    (INVOKE,),
    "find(q): locate UI nodes by kind ('view', 'tab', 'button', 'list', "
    "'item') or by label substring. Returns handles exposing id, kind, "
    "label, route, and click().",
    ("app.ui.click", "app.ui.currentRoute"),
)
_register(
    "app.ui.click",
    (INVOKE,),
    "click(nodeId): click a UI node; nodes carrying a route navigate to it. "
    "Usually called through a handle returned by app.ui.find.",
    ("app.ui.find", "app.ui.navigate"),
)


def readable_paths() -> frozenset[str]:
    return frozenset(_READERS)


def writable_paths() -> frozenset[str]:
    return frozenset(_WRITERS)


def invokable_paths() -> frozenset[str]:
    return frozenset(_INVOKERS)


def apply_call(state: HostState, call: BridgeCall):
    """Apply one bridge call to `state` in place and return its value.

    Raises UnknownPath / ArityError / ArgumentTypeError / DomainError; never
    leaves the state partially modified (handlers validate before mutating).
    """
    if call.kind == READ:
        reader = _READERS.get(call.path)
        if reader is None:
            raise UnknownPath(f"{call.path} is not readable")
        return reader(state)
    if call.kind == WRITE:
        writer = _WRITERS.get(call.path)
        if writer is None:
            raise UnknownPath(f"{call.path} is not writable")
        if len(call.args) != 1:
            raise ArityError(f"write to {call.path} takes exactly one value")
        return writer(state, call.args[0])
    if call.kind == INVOKE:
        entry = _INVOKERS.get(call.path)
        if entry is None:
            raise UnknownPath(f"{call.path} is not callable")
        handler, lo, hi = entry
        if not lo <= len(call.args) <= hi:
            wanted = str(lo) if lo == hi else f"{lo} to {hi}"
            raise ArityError(f"{call.path} takes {wanted} argument(s), got {len(call.args)}")
        return handler(state, *call.args)
    raise UnknownPath(f"unknown call kind {call.kind!r}")


def dispatch(state: HostState, call: BridgeCall) -> tuple[HostState, object]:
    """Pure form of apply_call: returns (updated state, value)."""
    working = copy_state(state)
    value = apply_call(working, call)
    return working, value


def bridge_symbol_docs() -> list[dict]:
    """Symbol records for the context index, derived from the registry."""
    docs = [
        {
            "path": entry.path,
            "kind": "bridge-entry",
            "doc": f"[{'/'.join(entry.kinds)}] {entry.doc}",
            "edges": list(entry.edges),
        }
        for entry in sorted(SURFACE.values(), key=lambda e: e.path)
    ]
    docs.append(
        {
            "path": "routes",
            "kind": "route",
            "doc": "Known routes: home, library, library/favorites, library/history, "
            "editor, search?q=<text>. The library view shows six tabs; the sixth "
            "is 'Play History'.",
            "edges": ["app.ui.navigate", "app.ui.currentRoute"],
        }
    )
    docs.append(
        {
            "path": "example.adjust-volume",
            "kind": "example",
            "doc": "let v = Math.min(app.player.volume + 0.1, 1);\n"
            "app.player.volume = v;\n"
            "console.log('Volume increased to', v);",
            "edges": ["app.player.volume"],
        }
    )
    docs.append(
        {
            "path": "example.click-history-tab",
            "kind": "example",
            "doc": "app.ui.navigate('library');\n"
            "const tabs = app.ui.find('tab');\n"
            "if (tabs.length >= 6) { tabs[5].click(); }",
            "edges": ["app.ui.find", "app.ui.click"],
        }
    )
    return docs
