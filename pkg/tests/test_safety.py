from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from codeloop.hostapp.bridge import BridgeCall, INVOKE, READ, WRITE
from codeloop.safety.analyzer import analyze, collect_sites
from codeloop.safety.rules import (
    ALLOW,
    DENY,
    NEEDS_APPROVAL,
    RuleSet,
    RuleSyntaxError,
    SafetyRule,
    guard_check,
    load_rules,
    make_guard,
    verification_rules,
)
from codeloop.sandbox.executor import ActionCode


def code(src: str) -> ActionCode:
    return ActionCode.js(src)


# --- rule parsing -----------------------------------------------------------


def test_parse_deny_write_rule():
    rs = load_rules('deny_write app.library.* "library is read-only"')
    assert len(rs.rules) == 1
    rule = rs.rules[0]
    assert rule.kind == "deny_write"
    assert rule.pattern == "app.library.*"
    assert rule.reason == "library is read-only"


def test_parse_require_approval_rule():
    rs = load_rules('require_approval app.editor.close* "destructive"')
    assert rs.rules[0].kind == "require_approval"


def test_unknown_kind_reports_line_number():
    with pytest.raises(RuleSyntaxError) as err:
        load_rules("frobnicate x")
    assert err.value.line == 1


def test_comments_blank_lines_default_and_threshold():
    rs = load_rules(
        "# comment\n\n"
        'deny_global fetch "no net"\n'
        "default deny\n"
        'multi_write_approval 2 "lots of writes"\n'
    )
    assert len(rs.rules) == 1
    assert rs.default_allow is False
    assert rs.multi_write_threshold == 2


# --- static analysis ----------------------------------------------------------


def test_deny_global_fetch_at_position():
    rs = load_rules('deny_global fetch "no network"')
    verdict = analyze(code("fetch('http://x')"), rs)
    assert verdict.decision == DENY
    assert verdict.reasons[0][1] == "1:1"
    assert "no network" in verdict.reasons[0][0]


def test_non_matching_write_allows():
    rs = load_rules('deny_write app.library.* "ro"')
    assert analyze(code("app.player.volume = 0.2"), rs).decision == ALLOW


def test_close_other_tabs_needs_approval():
    rs = load_rules('require_approval app.editor.close* "destructive"')
    verdict = analyze(code("app.editor.closeOtherTabs()"), rs)
    assert verdict.decision == NEEDS_APPROVAL
    assert "destructive" in verdict.reasons[0][0]


def test_deny_dominates_needs_approval():
    rs = load_rules(
        'require_approval app.editor.close* "gate"\n'
        'deny_global fetch "no net"\n'
    )
    verdict = analyze(code("fetch('x'); app.editor.closeTab('tab-1');"), rs)
    assert verdict.decision == DENY


def test_alias_of_namespace_resolves_statically():
    rs = load_rules('deny_write app.library.* "ro"')
    verdict = analyze(code("const lib = app.library; lib.favorites = [];"), rs)
    assert verdict.decision == DENY


def test_computed_bridge_path_escalates_to_approval():
    rs = load_rules('deny_write app.library.* "ro"')
    verdict = analyze(code("app['lib' + 'rary'].favorites = [];"), rs)
    assert verdict.decision == NEEDS_APPROVAL


def test_computed_path_allowed_when_ruleset_has_no_restrictions():
    rs = load_rules('deny_global fetch "no net"')  # global-only rules
    assert analyze(code("app['x'].y = 1"), rs).decision == ALLOW


def test_value_indexing_past_a_leaf_is_not_dynamic():
    rs = load_rules('deny_write app.library.* "ro"')
    src = "const ps = app.editor.activeDocument.paragraphs; ps[1] = 'x';"
    assert analyze(code(src), rs).decision == ALLOW


def test_multi_write_threshold_escalates():
    rs = load_rules('multi_write_approval 3 "bulk"')
    src = "app.player.volume = 1; app.editor.fontSize = 20; app.editor.activeDocument.paragraphs = [];"
    verdict = analyze(code(src), rs)
    assert verdict.decision == NEEDS_APPROVAL
    assert "bulk" in verdict.reasons[0][0]
    two = "app.player.volume = 1; app.editor.fontSize = 20;"
    assert analyze(code(two), rs).decision == ALLOW


def test_never_allow_literal_path_matched_by_deny_rule():
    rs = load_rules('deny_write app.library.* "ro"')
    samples = [
        "app.library.favorites = []",
        "if (true) { app.library.favorites = [1]; }",
        "function f() { app.library.tracks = {}; } f();",
        "const l = app.library; l.anything = 0;",
    ]
    for src in samples:
        assert analyze(code(src), rs).decision != ALLOW, src


def test_shadowed_app_is_not_the_bridge():
    rs = load_rules('deny_write app.player.* "frozen"')
    src = "const app = {player: {}}; app.player.volume = 1;"
    assert analyze(code(src), rs).decision == ALLOW


def test_analyze_is_pure_and_deterministic():
    rs = load_rules('deny_global fetch "no net"\nrequire_approval app.editor.close* "gate"')
    unit = code("app.editor.closeTab('t'); fetch('x');")
    first = analyze(unit, rs)
    second = analyze(unit, rs)
    assert first.decision == second.decision
    assert first.reasons == second.reasons


def test_first_match_wins_metamorphic():
    src = "app.editor.closeOtherTabs();"
    deny_first = RuleSet(
        rules=[
            SafetyRule("deny_call", "app.editor.close*", "hard no"),
            SafetyRule("require_approval", "app.editor.close*", "soft gate"),
        ]
    )
    approval_first = RuleSet(rules=list(reversed(deny_first.rules)))
    assert analyze(code(src), deny_first).decision == DENY
    assert analyze(code(src), approval_first).decision == NEEDS_APPROVAL


def test_collect_sites_positions():
    sites = collect_sites(__import__("codeloop.sandbox.parser", fromlist=["parse"]).parse(
        "app.player.volume = 0.5;\nfetch('x');"
    ))
    kinds = {(s.kind, s.path): (s.line, s.col) for s in sites}
    assert kinds[("write", "app.player.volume")][0] == 1
    assert kinds[("global", "fetch")] == (2, 1)


# --- dynamic guard -------------------------------------------------------------


def test_guard_exact_write_match():
    rs = load_rules('deny_write app.library.* "ro"')
    allowed, reason = guard_check(BridgeCall("app.library.favorites", WRITE, [[]]), rs)
    assert not allowed
    assert "ro" in reason


def test_guard_reads_unaffected_by_deny_write():
    rs = load_rules('deny_write app.library.* "ro"')
    allowed, _ = guard_check(BridgeCall("app.library.favorites", INVOKE, []), rs)
    assert allowed
    allowed, _ = guard_check(BridgeCall("app.library.favorites", READ, []), rs)
    assert allowed


def test_allowlist_mode_denies_everything_else():
    rs = load_rules('allowlist_mode app.player "player only"')
    allowed, reason = guard_check(BridgeCall("app.editor.openTab", INVOKE, []), rs)
    assert not allowed
    assert "not allowlisted" in reason
    allowed, _ = guard_check(BridgeCall("app.player.volume", WRITE, [0.5]), rs)
    assert allowed


def test_guard_maps_unapproved_approval_rule_to_deny():
    rs = load_rules('require_approval app.editor.close* "gate"')
    call = BridgeCall("app.editor.closeOtherTabs", INVOKE, [])
    allowed, reason = guard_check(call, rs)
    assert not allowed and "approval" in reason
    allowed, _ = guard_check(call, rs, approved=True)
    assert allowed


def test_guard_depends_only_on_path_kind_rules():
    rs = load_rules('deny_call app.player.next "no skipping"')
    a = guard_check(BridgeCall("app.player.next", INVOKE, []), rs)
    b = guard_check(BridgeCall("app.player.next", INVOKE, ["ignored-arg"]), rs)
    assert a == b == (False, "app.player.next denied: no skipping")


def test_make_guard_adapts_ruleset():
    guard = make_guard(load_rules("default deny"))
    allowed, reason = guard(BridgeCall("app.player.volume", READ, []))
    assert not allowed
    assert "default" in reason


def test_verification_rules_are_read_only():
    rs = verification_rules()
    assert guard_check(BridgeCall("app.player.volume", WRITE, [1]), rs)[0] is False
    assert guard_check(BridgeCall("app.ui.navigate", INVOKE, ["home"]), rs)[0] is False
    assert guard_check(BridgeCall("app.player.volume", READ, []), rs)[0] is True
    assert guard_check(BridgeCall("app.library.favorites", INVOKE, []), rs)[0] is True


_RULE_STRATEGY = st.lists(
    st.sampled_from(
        [
            SafetyRule("deny_write", "app.library.*", "ro"),
            SafetyRule("deny_call", "app.player.*", "no playback"),
            SafetyRule("require_approval", "app.editor.close*", "gate"),
            SafetyRule("deny_global", "fetch", "no net"),
        ]
    ),
    max_size=4,
)


@settings(max_examples=50, deadline=None)
@given(_RULE_STRATEGY, st.booleans())
def test_guard_never_throws(rules, default_allow):
    rs = RuleSet(rules=rules, default_allow=default_allow)
    for call in (
        BridgeCall("app.player.next", INVOKE, []),
        BridgeCall("app.library.favorites", WRITE, [[]]),
        BridgeCall("app.editor.closeTab", INVOKE, ["t"]),
        BridgeCall("app.ui.currentRoute", READ, []),
    ):
        allowed, reason = guard_check(call, rs)
        assert isinstance(allowed, bool)
        assert isinstance(reason, str)
