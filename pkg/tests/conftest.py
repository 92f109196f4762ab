"""Shared fixtures and the acceptance summary printed after the run."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE = {}


@pytest.fixture
def verdict():
    """Record one acceptance line: ``verdict(number, passed, detail)``."""

    def record(number, passed, detail):
        ACCEPTANCE[number] = (bool(passed), detail)
        print(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number:2d}: {detail}")
