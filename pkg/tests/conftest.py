"""Print one PASS/FAIL line per acceptance criterion at the end of the run."""

import re

_CRITERIA: dict = {}
_NAME = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _NAME.search(report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2).replace("_", " "))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA[key] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (n, label), verdict in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"{verdict} criterion {n:>2}: {label}")
