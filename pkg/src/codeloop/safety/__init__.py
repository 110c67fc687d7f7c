"""Static rule analysis plus the dynamic per-call guard."""

from codeloop.safety.analyzer import Verdict, analyze, collect_sites
from codeloop.safety.rules import (
    ALLOW,
    DENY,
    NEEDS_APPROVAL,
    RuleSet,
    RuleSyntaxError,
    SafetyRule,
    guard_check,
    load_rules,
    load_rules_file,
    make_guard,
    verification_rules,
)

__all__ = [
    "Verdict",
    "analyze",
    "collect_sites",
    "ALLOW",
    "DENY",
    "NEEDS_APPROVAL",
    "RuleSet",
    "RuleSyntaxError",
    "SafetyRule",
    "guard_check",
    "load_rules",
    "load_rules_file",
    "make_guard",
    "verification_rules",
]
