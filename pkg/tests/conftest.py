import numpy as np
import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and summary")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, text = mark.args
    ok = report.passed if report.when == "call" else not report.failed
    prev_ok, _ = _criteria.get(n, (True, text))
    _criteria[n] = (prev_ok and ok, text)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok, text = _criteria[n]
        terminalreporter.write_line(f"AC{n} {'PASS' if ok else 'FAIL'}  {text}")
