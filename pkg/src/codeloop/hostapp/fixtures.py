"""Benchmark fixtures: named, fully deterministic host states.

Each fixture is authored here and shipped as a canonical serialized file under
data/fixtures/; a golden-file test asserts the two stay byte-identical.
"""

from __future__ import annotations

from importlib import resources

from codeloop.hostapp.state import (
    Document,
    EditorState,
    HostState,
    PlayerState,
    Track,
    deserialize_state,
    serialize_state,
    validate,
)


class UnknownFixture(Exception):
    pass


_TRACKS = [
    ("t01", "Hotel California", "Eagles", 391),
    ("t02", "Bohemian Rhapsody", "Queen", 354),
    ("t03", "Imagine", "John Lennon", 183),
    ("t04", "Hey Jude", "The Beatles", 431),
    ("t05", "Billie Jean", "Michael Jackson", 294),
    ("t06", "Like a Rolling Stone", "Bob Dylan", 369),
    ("t07", "Smells Like Teen Spirit", "Nirvana", 301),
    ("t08", "Purple Rain", "Prince", 520),
    ("t09", "Stairway to Heaven", "Led Zeppelin", 482),
    ("t10", "What a Wonderful World", "Louis Armstrong", 139),
    ("t11", "Respect", "Aretha Franklin", 147),
    ("t12", "Take Five", "The Dave Brubeck Quartet", 324),
]

_TRIP_PLAN = [
    "# Weekend Trip Plan",
    "Pack hiking boots and a rain jacket before Friday.",
    "Book the cabin for two nights and confirm the checkout time.",
    "Groceries: coffee, oatmeal, pasta, and trail mix.",
    "Send the packing list to Alex on Thursday.",
]

_READING_LIST = [
    "# Reading List",
    "Finish the compilers book, chapters 7 through 9.",
    "Skim the garbage-collection survey before book club.",
]


def _base_state() -> HostState:
    return HostState(
        player=PlayerState(
            volume=0.5,
            queue=[tid for tid, *_ in _TRACKS],
            current_index=0,
            favorites={"t02", "t05", "t09"},
            history=[("t03", 1), ("t07", 2), ("t02", 3), ("t01", 4), ("t05", 5)],
        ),
        library={
            tid: Track(id=tid, title=title, artist=artist, duration=duration)
            for tid, title, artist, duration in _TRACKS
        },
        editor=EditorState(tabs=[("tab-1", "doc-1")], active_tab="tab-1"),
        documents={
            "doc-1": Document(id="doc-1", title="Trip Plan", paragraphs=list(_TRIP_PLAN), font_size=14)
        },
        current_route="home",
        logical_clock=5,
    )


def _default() -> HostState:
    return _base_state()


def _empty_editor() -> HostState:
    state = _base_state()
    state.documents["doc-1"].paragraphs = []
    return state


def _multi_tab() -> HostState:
    state = _base_state()
    state.documents["doc-2"] = Document(
        id="doc-2", title="Reading List", paragraphs=list(_READING_LIST), font_size=14
    )
    state.documents["doc-3"] = Document(
        id="doc-3", title="Scratch", paragraphs=["(scratch space)"], font_size=12
    )
    state.editor.tabs = [("tab-1", "doc-1"), ("tab-2", "doc-2"), ("tab-3", "doc-3")]
    state.editor.active_tab = "tab-1"
    return state


_BUILDERS = {
    "default": _default,
    "empty-editor": _empty_editor,
    "multi-tab": _multi_tab,
}

FIXTURE_NAMES = tuple(sorted(_BUILDERS))


def init_fixture(fixture_name: str) -> HostState:
    """Build the named fixture. Same name, same structure, every time."""
    builder = _BUILDERS.get(fixture_name)
    if builder is None:
        raise UnknownFixture(f"unknown fixture {fixture_name!r}; known: {', '.join(FIXTURE_NAMES)}")
    state = builder()
    validate(state)
    return state


def fixture_file_text(fixture_name: str) -> str:
    """The shipped serialized form of the fixture."""
    ref = resources.files("codeloop.data").joinpath(f"fixtures/{fixture_name}.json")
    if not ref.is_file():
        raise UnknownFixture(f"no fixture file for {fixture_name!r}")
    return ref.read_text(encoding="utf-8")


def load_fixture_file(fixture_name: str) -> HostState:
    return deserialize_state(fixture_file_text(fixture_name))


def render_fixture_files() -> dict[str, str]:
    """name -> canonical serialized text, for regeneration and golden tests."""
    return {name: serialize_state(init_fixture(name)) for name in FIXTURE_NAMES}
