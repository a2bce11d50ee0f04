import pytest

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    key = marker.args
    if report.failed or (report.when == "call" and key not in _ACCEPTANCE):
        _ACCEPTANCE[key] = "FAIL" if report.failed else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), status in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"[{status}] {number}. {title}")
