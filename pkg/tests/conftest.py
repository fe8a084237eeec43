import numpy as np
import pytest

from collapse_lab.qcore import StateVec

_acceptance = []


def random_state(rng, labels):
    v = rng.normal(size=len(labels)) + 1j * rng.normal(size=len(labels))
    return StateVec.normalized(labels, v)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = report.user_properties and dict(report.user_properties).get("acceptance")
    if marker:
        _acceptance.append((marker[0], marker[1], report.outcome))


def pytest_runtest_setup(item):
    m = item.get_closest_marker("acceptance")
    if m:
        item.user_properties.append(("acceptance", m.args))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, outcome in sorted(_acceptance):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"AC{number} {status}  {text}")
