"""Synthesized UI view-model for the host app.

The tree is derived deterministically from the current route and state; it is
not a rendered DOM. Clickable nodes carry a route, and clicking (a bridge
call) navigates there. The library view always exposes six tabs, the last one
"Play History", so selector-style action code can locate and click it.
"""

from __future__ import annotations

from codeloop.hostapp.state import (
    HostState,
    SEARCH_ROUTE_PREFIX,
    Track,
    UiNode,
)

LIBRARY_TABS = (
    ("Tracks", "library"),
    ("Albums", None),
    ("Artists", None),
    ("Playlists", None),
    ("Favorites", "library/favorites"),
    ("Play History", "library/history"),
)

HOME_TABS = ("For You", "Discover", "Charts", "Radio")


def _nav_buttons() -> list[UiNode]:
    return [
        UiNode(id="nav-home", kind="button", label="Home", route="home"),
        UiNode(id="nav-library", kind="button", label="Library", route="library"),
        UiNode(id="nav-editor", kind="button", label="Editor", route="editor"),
    ]


def _track_item(prefix: str, i: int, track: Track) -> UiNode:
    return UiNode(
        id=f"{prefix}-item-{i}",
        kind="item",
        label=f"{track.title} - {track.artist}",
    )


def _library_children(state: HostState) -> list[UiNode]:
    children = [
        UiNode(
            id=f"library-tab-{i}",
            kind="tab",
            label=label,
            route=route,
        )
        for i, (label, route) in enumerate(LIBRARY_TABS)
    ]
    route = state.current_route
    if route == "library":
        tracks = [state.library[tid] for tid in sorted(state.library)]
        children.append(
            UiNode(
                id="library-list",
                kind="list",
                label="All Tracks",
                children=[_track_item("library", i, t) for i, t in enumerate(tracks)],
            )
        )
    elif route == "library/favorites":
        favs = [state.library[tid] for tid in sorted(state.player.favorites)]
        children.append(
            UiNode(
                id="favorites-list",
                kind="list",
                label="Favorites",
                children=[_track_item("favorites", i, t) for i, t in enumerate(favs)],
            )
        )
    elif route == "library/history":
        children.append(
            UiNode(
                id="history-list",
                kind="list",
                label="Play History",
                children=[
                    _track_item("history", i, state.library[tid])
                    for i, (tid, _at) in enumerate(state.player.history)
                ],
            )
        )
    return children


def ui_tree(state: HostState) -> UiNode:
    route = state.current_route
    children = _nav_buttons()
    if route == "home":
        label = "Home"
        children += [
            UiNode(id=f"home-tab-{i}", kind="tab", label=tab_label)
            for i, tab_label in enumerate(HOME_TABS)
        ]
    elif route.startswith("library"):
        label = "Library"
        children += _library_children(state)
    elif route == "editor":
        label = "Editor"
        for i, (tab_id, doc_id) in enumerate(state.editor.tabs):
            doc = state.documents[doc_id]
            children.append(
                UiNode(id=f"editor-tab-{i}", kind="tab", label=doc.title)
            )
    elif route.startswith(SEARCH_ROUTE_PREFIX):
        label = "Search"
        query = route[len(SEARCH_ROUTE_PREFIX):].lower()
        matches = [
            t
            for _tid, t in sorted(state.library.items())
            if query in t.title.lower() or query in t.artist.lower()
        ]
        children.append(
            UiNode(
                id="search-results",
                kind="list",
                label="Results",
                children=[_track_item("search", i, t) for i, t in enumerate(matches)],
            )
        )
    else:  # pragma: no cover - routes are validated upstream
        label = route
    return UiNode(id="root", kind="view", label=label, children=children)


def walk(node: UiNode):
    """Depth-first preorder walk."""
    yield node
    for child in node.children:
        yield from walk(child)


def find_nodes(state: HostState, query: str) -> list[UiNode]:
    """Match by node kind (exact) or by label (case-insensitive substring)."""
    tree = ui_tree(state)
    q = query.strip()
    if q in {"view", "tab", "button", "list", "item"}:
        return [n for n in walk(tree) if n.kind == q]
    needle = q.lower()
    return [n for n in walk(tree) if needle and needle in n.label.lower()]


def find_node_by_id(state: HostState, node_id: str) -> UiNode | None:
    for node in walk(ui_tree(state)):
        if node.id == node_id:
            return node
    return None


def node_handle_dict(node: UiNode) -> dict:
    return {"id": node.id, "kind": node.kind, "label": node.label, "route": node.route}


def tree_to_dict(node: UiNode) -> dict:
    out = node_handle_dict(node)
    out["children"] = [tree_to_dict(c) for c in node.children]
    return out
