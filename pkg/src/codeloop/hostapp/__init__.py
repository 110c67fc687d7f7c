"""Reference host application: state model, bridge surface, fixtures."""

from codeloop.hostapp.bridge import (
    ArityError,
    ArgumentTypeError,
    BridgeCall,
    BridgeError,
    DomainError,
    UnknownPath,
    apply_call,
    dispatch,
)
from codeloop.hostapp.diffing import ABSENT, DiffEntry, StateDiff, apply_diff, diff
from codeloop.hostapp.fixtures import FIXTURE_NAMES, UnknownFixture, init_fixture
from codeloop.hostapp.state import (
    Document,
    EditorState,
    HostState,
    InvalidState,
    PlayerState,
    Track,
    UiNode,
    deserialize_state,
    serialize_state,
    state_hash,
    states_equal,
    validate,
)
from codeloop.hostapp.uitree import ui_tree

__all__ = [
    "ArityError",
    "ArgumentTypeError",
    "BridgeCall",
    "BridgeError",
    "DomainError",
    "UnknownPath",
    "apply_call",
    "dispatch",
    "ABSENT",
    "DiffEntry",
    "StateDiff",
    "apply_diff",
    "diff",
    "FIXTURE_NAMES",
    "UnknownFixture",
    "init_fixture",
    "Document",
    "EditorState",
    "HostState",
    "InvalidState",
    "PlayerState",
    "Track",
    "UiNode",
    "deserialize_state",
    "serialize_state",
    "state_hash",
    "states_equal",
    "validate",
    "ui_tree",
]
