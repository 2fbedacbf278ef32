import sys
from pathlib import Path

import pytest

# make reference_channel importable regardless of how pytest is invoked
sys.path.insert(0, str(Path(__file__).parent))

_criterion_lines: list[str] = []


@pytest.fixture(scope="session")
def criterion_report():
    """Shared sink for CRITERION lines, echoed after the run."""
    return _criterion_lines


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)
