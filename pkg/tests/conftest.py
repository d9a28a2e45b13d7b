"""Collects acceptance-criterion outcomes and prints one line per criterion."""
import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": True, "reason": ""})
    if report.failed:
        entry["passed"] = False
        msg = getattr(report.longrepr, "reprcrash", None)
        entry["reason"] = (msg.message if msg else str(report.longrepr)).splitlines()[0][:160]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["passed"] else "FAIL"
        line = f"criterion {number:2d} {status}  {e['title']}"
        if not e["passed"]:
            line += f"  ({e['reason']})"
        terminalreporter.write_line(line)
