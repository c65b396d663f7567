import pytest

from besselwave.grid import build_grid

# Filled by test_acceptance.py; reported after the run.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def small_grids():
    """Coarse grids, one per weight, for the fast unit tests."""
    return {a: build_grid(a, 12.0, 40, 20) for a in (-0.5, 0.0, 1.0, 2.0)}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
