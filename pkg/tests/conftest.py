from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

_acceptance: dict[str, str] = {}


@pytest.fixture
def data_dir():
    return DATA


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.outcome != "passed":
        outcome = report.outcome.upper()
        if report.skipped:
            outcome = "SKIPPED (" + str(report.longrepr[-1]) + ")"
        _acceptance.setdefault(name, outcome)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance.items():
        terminalreporter.write_line(f"{outcome:<8} {name}")
