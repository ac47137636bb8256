from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from motivic_wf.local_field import LocalField

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def K3() -> LocalField:
    return LocalField.make(3)


@pytest.fixture(scope="session")
def K2() -> LocalField:
    return LocalField.make(2)


@pytest.fixture(scope="session")
def K5() -> LocalField:
    return LocalField.make(5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
