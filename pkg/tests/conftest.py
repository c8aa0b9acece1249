import pytest
from hypothesis import settings

from neurospike import simulator
from neurospike.config import parse_scenario

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# acceptance verdicts, printed in the terminal summary whatever the outcome
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance():
    """Record one verdict line per criterion."""

    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"criterion {number} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
        return passed

    return record


@pytest.fixture(scope="session")
def median_scenario():
    return parse_scenario("median5")


@pytest.fixture(scope="session")
def median_trace(median_scenario):
    return simulator.run(median_scenario)


@pytest.fixture(scope="session")
def lienard_scenario():
    return parse_scenario("lienard4")


@pytest.fixture(scope="session")
def lienard_trace(lienard_scenario):
    return simulator.run(lienard_scenario)


@pytest.fixture(scope="session")
def lienard_blended(lienard_scenario):
    return simulator.run_blended(lienard_scenario)
