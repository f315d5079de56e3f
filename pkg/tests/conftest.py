from pathlib import Path

import pytest

import secidx

DATA = Path(secidx.__file__).parent / "data"

_acceptance: list = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if hasattr(rep, "wasxfail"):
            status = "XFAIL"
        elif rep.passed:
            status = "PASS"
        elif rep.skipped:
            status = "SKIP"
        else:
            status = "FAIL"
        _acceptance.append((status, marker.args[0], round(rep.duration, 3)))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for status, label, duration in _acceptance:
        terminalreporter.write_line(f"{status:<5} {label} ({duration:.2f}s)")


@pytest.fixture
def data_dir():
    return DATA
