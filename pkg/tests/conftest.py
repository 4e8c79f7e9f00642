import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # expose tests/oracles.py


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(number, title): acceptance criterion covered by this test; "
        "the terminal summary prints one PASS/FAIL line per criterion number",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = (marker.args[0], marker.args[1])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # number -> [title, status]; a criterion passes only if every test and
    # fixture phase attached to it passed.
    criteria: dict[int, list] = {}
    for reports in terminalreporter.stats.values():
        for report in reports:
            tagged = getattr(report, "criterion", None)
            if tagged is None:
                continue
            number, title = tagged
            entry = criteria.setdefault(number, [title, "PASS"])
            if getattr(report, "failed", False):
                entry[1] = "FAIL"
            elif getattr(report, "skipped", False) and entry[1] != "FAIL":
                entry[1] = "SKIP"
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(criteria):
        title, status = criteria[number]
        line = f"criterion {number:>2}  {title:<52} {status}"
        color = {"PASS": "green", "FAIL": "red", "SKIP": "yellow"}[status]
        terminalreporter.write_line(line, **{color: True})
