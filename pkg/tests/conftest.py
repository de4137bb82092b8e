import pytest

from hybridsim.config import ModelConfig
from hybridsim.scenario import default_scenario

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def model():
    return ModelConfig()


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
