from pathlib import Path

import pytest
from hypothesis import settings

from whitham import ContinuationConfig, trace_branch

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

# acceptance outcomes, filled by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])


@pytest.fixture(scope="session")
def fig1_path():
    return FIXTURES / "fig1_profile.json"


@pytest.fixture(scope="session")
def principal_branch():
    return trace_branch("whitham", ContinuationConfig(k=1))


@pytest.fixture(scope="session")
def second_branch():
    return trace_branch("whitham", ContinuationConfig(k=2))


@pytest.fixture(scope="session")
def coarse_branch():
    """Principal branch started on 16 points."""
    return trace_branch("whitham", ContinuationConfig(k=1, n_initial=16))
