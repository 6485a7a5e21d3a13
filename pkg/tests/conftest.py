"""Prints one pass/fail line per acceptance criterion at the end of a run."""
import re

_CRITERIA: dict[int, tuple[str, str, float]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        num = int(m.group(1))
        name = m.group(2).replace("_", " ")
        prev = _CRITERIA.get(num)
        if prev is None or prev[1] == "PASS":
            _CRITERIA[num] = (name, "PASS" if report.passed else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        name, verdict, secs = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num}: {verdict}  {name} ({secs:.1f} s)")
