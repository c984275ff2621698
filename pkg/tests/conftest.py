import pytest

from choicewalk import walk


def pytest_report_header(config):
    return f"choicewalk backends: {', '.join(sorted(walk._KERNELS))} (default {walk.BACKEND})"


@pytest.fixture(params=sorted(walk._KERNELS))
def backend(request):
    return request.param


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    item.config._criteria[number] = (title, report.outcome, detail, report.duration)


def pytest_terminal_summary(terminalreporter, config):
    criteria = getattr(config, "_criteria", {})
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(criteria):
        title, outcome, detail, duration = criteria[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {number} {status}: {title} ({duration:.1f}s)"
        if detail:
            line += f" | {detail}"
        terminalreporter.write_line(line)
