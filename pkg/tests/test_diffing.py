from __future__ import annotations

from hypothesis import given, settings, strategies as st

from codeloop.hostapp.bridge import BridgeCall, INVOKE, WRITE, dispatch
from codeloop.hostapp.diffing import ABSENT, StateDiff, apply_diff, diff
from codeloop.hostapp.fixtures import init_fixture
from codeloop.hostapp.state import state_to_dict, states_equal


def _leaf_paths(node, prefix=""):
    """Independent oracle: flatten every scalar leaf to path -> value."""
    if isinstance(node, dict):
        out = {}
        for key, value in node.items():
            out.update(_leaf_paths(value, f"{prefix}{key}/"))
        return out
    if isinstance(node, list):
        out = {}
        for i, value in enumerate(node):
            out.update(_leaf_paths(value, f"{prefix}{i}/"))
        return out
    return {prefix.rstrip("/"): node}


def test_identity_diff_is_empty():
    state = init_fixture("default")
    assert diff(state, state).is_empty()


def test_single_field_change():
    before = init_fixture("default")
    after, _ = dispatch(before, BridgeCall("app.player.volume", WRITE, [0.6]))
    after.logical_clock = before.logical_clock  # isolate the volume entry
    entries = diff(before, after).entries
    assert [e.path for e in entries] == ["player/volume"]
    assert entries[0].before == 0.5
    assert entries[0].after == 0.6


def test_symmetry_swaps_before_and_after():
    before = init_fixture("default")
    after, _ = dispatch(before, BridgeCall("app.editor.openTab", INVOKE, ["X"]))
    forward = diff(before, after)
    backward = diff(after, before)
    fwd = {e.path: (repr(e.before), repr(e.after)) for e in forward.entries}
    bwd = {e.path: (repr(e.after), repr(e.before)) for e in backward.entries}
    assert fwd == bwd


_MUTATIONS = st.lists(
    st.one_of(
        st.floats(min_value=0, max_value=1, allow_nan=False).map(
            lambda v: BridgeCall("app.player.volume", WRITE, [v])
        ),
        st.just(BridgeCall("app.player.next", INVOKE, [])),
        st.sampled_from(["One", "Two"]).map(lambda t: BridgeCall("app.editor.openTab", INVOKE, [t])),
        st.just(BridgeCall("app.editor.closeOtherTabs", INVOKE, [])),
        st.lists(st.sampled_from(["p", "q", "r"]), max_size=5).map(
            lambda ps: BridgeCall("app.editor.activeDocument.paragraphs", WRITE, [ps])
        ),
        st.sampled_from(["home", "library", "editor"]).map(
            lambda r: BridgeCall("app.ui.navigate", INVOKE, [r])
        ),
        st.integers(min_value=6, max_value=72).map(
            lambda v: BridgeCall("app.editor.fontSize", WRITE, [v])
        ),
    ),
    max_size=8,
)


@settings(max_examples=80, deadline=None)
@given(_MUTATIONS)
def test_diff_covers_exactly_the_changed_leaves(calls):
    before = init_fixture("default")
    after = before
    for call in calls:
        after, _ = dispatch(after, call)
    entries = diff(before, after).entries

    oracle_before = _leaf_paths(state_to_dict(before))
    oracle_after = _leaf_paths(state_to_dict(after))
    changed = {
        p
        for p in set(oracle_before) | set(oracle_after)
        if oracle_before.get(p, ABSENT) != oracle_after.get(p, ABSENT)
    }

    def covered_by(leaf: str, entry_path: str) -> bool:
        return leaf == entry_path or leaf.startswith(entry_path + "/")

    # every changed leaf is covered by exactly the diff; no spurious entries
    for leaf in changed:
        assert any(covered_by(leaf, e.path) for e in entries), leaf
    for entry in entries:
        assert any(covered_by(leaf, entry.path) for leaf in changed), entry.path


@settings(max_examples=80, deadline=None)
@given(_MUTATIONS)
def test_apply_diff_round_trip(calls):
    before = init_fixture("default")
    after = before
    for call in calls:
        after, _ = dispatch(after, call)
    state_diff = diff(before, after)
    rebuilt = apply_diff(before, state_diff)
    assert states_equal(rebuilt, after)
    if state_diff.is_empty():
        assert states_equal(before, after)


def test_diff_serialization_round_trip():
    before = init_fixture("default")
    after, _ = dispatch(before, BridgeCall("app.editor.openTab", INVOKE, ["X", ["a"]]))
    state_diff = diff(before, after)
    rebuilt = StateDiff.from_list(state_diff.to_list())
    assert rebuilt.to_list() == state_diff.to_list()
    assert states_equal(apply_diff(before, rebuilt), after)
