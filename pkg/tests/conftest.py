from __future__ import annotations

from importlib import resources

import pytest

from codeloop.safety.rules import RuleSet, load_rules
from codeloop.statekeeper import StateKeeper


def default_rules_text() -> str:
    return resources.files("codeloop.data").joinpath("rules/default.rules").read_text(encoding="utf-8")


@pytest.fixture
def default_rules() -> RuleSet:
    return load_rules(default_rules_text())


@pytest.fixture
def keeper(tmp_path) -> StateKeeper:
    return StateKeeper(tmp_path / "data")


def pytest_runtest_logreport(report):
    # one visible line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1].removeprefix("test_")
        print(f"\nACCEPTANCE {name}: {report.outcome.upper()}")
