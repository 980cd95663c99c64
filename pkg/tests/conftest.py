"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_RESULTS: dict[int, dict] = {}


@pytest.fixture
def detail(request):
    """Attach a measured value to the current criterion's report line."""
    marker = request.node.get_closest_marker("criterion")

    def note(text: str) -> None:
        if marker is not None:
            _RESULTS.setdefault(marker.args[0], {"title": marker.args[1]})["detail"] = text
        print(text)

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    entry = _RESULTS.setdefault(marker.args[0], {"title": marker.args[1]})
    entry["passed"] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        status = "PASS" if entry.get("passed") else "FAIL"
        line = f"criterion {number:2d} [{status}] {entry['title']}"
        if entry.get("detail"):
            line += f" | {entry['detail']}"
        tr.write_line(line)
