"""Shared pytest wiring: one summary line per acceptance-marked test.

Capture in pytest grabs the stdout file descriptor itself, so tests
cannot reliably print verdicts; instead the marked results are collected
here and written through the terminal reporter at the end of the run.
"""

import pytest

_VERDICTS = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(num, name): scenario check reported as one summary line")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            num, name = marker.args
            _VERDICTS.setdefault(num, (False, name))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    num, name = marker.args
    if rep.when == "call":
        _VERDICTS[num] = (rep.passed, name)
    elif rep.failed:
        # a setup or teardown crash still fails the criterion
        _VERDICTS[num] = (False, name)


def pytest_terminal_summary(terminalreporter):
    for num in sorted(_VERDICTS):
        passed, name = _VERDICTS[num]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {num} {verdict}: {name}")
