import sys

import pytest

from infogov.agents import TableSLA, load_default_calibration


@pytest.fixture(scope="session")
def table():
    return load_default_calibration()


@pytest.fixture(scope="session")
def table_sla(table):
    return TableSLA(table)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
