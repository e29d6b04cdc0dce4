from __future__ import annotations

import pytest

_results: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            num, title = mark.args
            item.user_properties.append(("criterion", num))
            _results.setdefault(num, {"title": title, "passed": 0, "failed": []})


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    entry = _results[crit]
    if report.failed:
        entry["failed"].append(report.nodeid.split("::")[-1])
    elif report.when == "call" and report.passed:
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    ran = {k: v for k, v in _results.items() if v["passed"] or v["failed"]}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ran):
        entry = ran[num]
        status = "FAIL" if entry["failed"] else "PASS"
        line = f"criterion {num:2d}: {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  (failed: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
