"""Acceptance bookkeeping: one pass/fail line per criterion in the terminal summary."""

import pytest

_OUTCOMES = {}
_DETAILS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def report_value(request):
    """Record a measured value for the criterion summary line."""
    marker = request.node.get_closest_marker("criterion")
    number = marker.args[0] if marker else None

    def record(text):
        _DETAILS.setdefault(number, []).append(text)
        print(f"[criterion {number}] {text}")

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        ok = rep.passed
        _OUTCOMES.setdefault(n, []).append((item.name, ok))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        results = _OUTCOMES[n]
        status = "PASS" if all(ok for _, ok in results) else "FAIL"
        failed = [name for name, ok in results if not ok]
        line = f"criterion {n:2d}: {status}"
        if _DETAILS.get(n):
            line += "  " + "; ".join(_DETAILS[n])
        if failed:
            line += "  failed: " + ", ".join(failed)
        terminalreporter.write_line(line)
