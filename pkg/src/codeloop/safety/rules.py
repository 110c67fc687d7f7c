"""Developer-authored safety rules and their runtime (dynamic) evaluation.

Rule file format, one rule per line, first match wins:

    deny_call app.player.*            "no playback control"
    deny_write app.library.*          "library is read-only"
    deny_global fetch                 "network access is not permitted"
    require_approval app.editor.close* "closing tabs is destructive"
    allowlist_mode app.player,app.ui  "player-only profile"
    multi_write_approval 3            "scripts writing many paths need review"
    default deny

`#` starts a comment. Patterns are shell-style globs over bridge paths or
global names. `allowlist_mode` takes a comma-separated set of permitted path
prefixes. `multi_write_approval <n>` escalates any script statically writing
>= n distinct paths. `default allow|deny` sets the no-match outcome (allow
if omitted).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fnmatch import fnmatchcase

from codeloop.hostapp.bridge import BridgeCall, INVOKE, READ, WRITE

KIND_DENY_CALL = "deny_call"
KIND_DENY_WRITE = "deny_write"
KIND_DENY_GLOBAL = "deny_global"
KIND_REQUIRE_APPROVAL = "require_approval"
KIND_ALLOWLIST = "allowlist_mode"

RULE_KINDS = (
    KIND_DENY_CALL,
    KIND_DENY_WRITE,
    KIND_DENY_GLOBAL,
    KIND_REQUIRE_APPROVAL,
    KIND_ALLOWLIST,
)

ALLOW = "Allow"
DENY = "Deny"
NEEDS_APPROVAL = "NeedsApproval"


class RuleSyntaxError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


@dataclass(frozen=True)
class SafetyRule:
    kind: str
    pattern: str  # glob; for allowlist_mode a comma-joined prefix set
    reason: str

    @property
    def prefixes(self) -> tuple[str, ...]:
        return tuple(p.strip() for p in self.pattern.split(",") if p.strip())


@dataclass
class RuleSet:
    rules: list[SafetyRule] = field(default_factory=list)
    default_allow: bool = True
    # static-analysis escalation: scripts writing >= threshold distinct paths
    multi_write_threshold: int | None = None
    multi_write_reason: str = ""

    def has_restrictions(self) -> bool:
        """True when unresolvable sites cannot be silently allowed."""
        if not self.default_allow:
            return True
        return any(
            r.kind in (KIND_DENY_CALL, KIND_DENY_WRITE, KIND_REQUIRE_APPROVAL, KIND_ALLOWLIST)
            for r in self.rules
        )


_LINE_RE = re.compile(
    r"""^(?P<kind>\S+)\s+(?P<pattern>\S+)(?:\s+"(?P<reason>[^"]*)")?\s*$"""
)


def load_rules(document: str) -> RuleSet:
    """Parse a rules document; raises RuleSyntaxError with the line number."""
    ruleset = RuleSet()
    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        match = _LINE_RE.match(line)
        if match is None:
            raise RuleSyntaxError(f"malformed rule line: {raw.strip()!r}", lineno)
        kind = match.group("kind")
        pattern = match.group("pattern")
        reason = match.group("reason") or ""
        if kind == "default":
            if pattern not in ("allow", "deny"):
                raise RuleSyntaxError("default must be 'allow' or 'deny'", lineno)
            ruleset.default_allow = pattern == "allow"
            continue
        if kind == "multi_write_approval":
            if not pattern.isdigit() or int(pattern) < 1:
                raise RuleSyntaxError("multi_write_approval needs a positive integer", lineno)
            ruleset.multi_write_threshold = int(pattern)
            ruleset.multi_write_reason = reason or "bulk mutation requires review"
            continue
        if kind not in RULE_KINDS:
            raise RuleSyntaxError(f"unknown rule kind {kind!r}", lineno)
        ruleset.rules.append(SafetyRule(kind=kind, pattern=pattern, reason=reason))
    return ruleset


def load_rules_file(path) -> RuleSet:
    with open(path, "r", encoding="utf-8") as fh:
        return load_rules(fh.read())


def _site_kind_matches(rule_kind: str, call_kind: str) -> bool:
    if rule_kind == KIND_DENY_CALL:
        return call_kind == INVOKE
    if rule_kind == KIND_DENY_WRITE:
        return call_kind == WRITE
    if rule_kind == KIND_REQUIRE_APPROVAL:
        return call_kind in (WRITE, INVOKE)
    if rule_kind == KIND_ALLOWLIST:
        return call_kind in (READ, WRITE, INVOKE)
    return False  # deny_global never matches bridge calls


def evaluate_path(rules: RuleSet, path: str, call_kind: str) -> tuple[str, SafetyRule | None]:
    """First-match-wins decision for one concrete bridge path.

    Returns (ALLOW | DENY | NEEDS_APPROVAL, matching rule or None).
    """
    for rule in rules.rules:
        if not _site_kind_matches(rule.kind, call_kind):
            continue
        if rule.kind == KIND_ALLOWLIST:
            if any(path == p or path.startswith(p + ".") for p in rule.prefixes):
                return ALLOW, rule
            return DENY, rule
        if fnmatchcase(path, rule.pattern):
            if rule.kind == KIND_REQUIRE_APPROVAL:
                return NEEDS_APPROVAL, rule
            return DENY, rule
    return (ALLOW if rules.default_allow else DENY), None


def evaluate_global(rules: RuleSet, name: str) -> tuple[str, SafetyRule | None]:
    for rule in rules.rules:
        if rule.kind == KIND_DENY_GLOBAL and fnmatchcase(name, rule.pattern):
            return DENY, rule
    return ALLOW, None


def guard_check(call: BridgeCall, rules: RuleSet, approved: bool = False) -> tuple[bool, str]:
    """Exact dynamic decision for a concrete call: (allowed, reason).

    A matching require_approval rule denies unless this execution was
    approved; the guard cannot pause a running script.
    """
    decision, rule = evaluate_path(rules, call.path, call.kind)
    if decision == ALLOW:
        return True, ""
    if decision == NEEDS_APPROVAL:
        if approved:
            return True, ""
        reason = rule.reason if rule else ""
        return False, f"{call.path} requires approval: {reason}".rstrip(": ")
    if rule is not None and rule.kind == KIND_ALLOWLIST:
        reason = "not allowlisted" + (f" ({rule.reason})" if rule.reason else "")
    elif rule is not None and rule.reason:
        reason = rule.reason
    else:
        reason = "denied by default"
    return False, f"{call.path} denied: {reason}"


def make_guard(rules: RuleSet, approved: bool = False):
    """Adapt a RuleSet into the callable the sandbox consults per call."""

    def guard(call: BridgeCall) -> tuple[bool, str]:
        return guard_check(call, rules, approved=approved)

    return guard


def verification_rules() -> RuleSet:
    """Read-only profile for verification code: no writes, no mutating calls."""
    lines = ['deny_write app.* "verification code must be read-only"']
    mutating_invokes = (
        "app.player.next",
        "app.player.previous",
        "app.library.search",
        "app.editor.openTab",
        "app.editor.closeTab",
        "app.editor.closeOtherTabs",
        "app.ui.navigate",
        "app.ui.click",
    )
    lines += [f'deny_call {path} "verification code must not mutate state"' for path in mutating_invokes]
    return load_rules("\n".join(lines))
