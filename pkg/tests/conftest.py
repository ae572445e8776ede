import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from quadremosaic.cfa import QUAD, RawImage

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE = {}
_NOTES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): exit criterion n")


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        crit = getattr(report, "_acceptance", None)
        if crit is not None:
            prev = _ACCEPTANCE.get(crit, "PASS")
            _ACCEPTANCE[crit] = "PASS" if prev == "PASS" and report.outcome == "passed" else "FAIL"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result()._acceptance = marker.args


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), status in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"[{status}] criterion {n}: {title}")
    for line in _NOTES:
        terminalreporter.write_line(f"  note: {line}")


@pytest.fixture
def acceptance_note():
    """Append a line to the acceptance summary printed at the end of the run."""
    return _NOTES.append


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_raw(rng, h, w, pattern=QUAD, **meta):
    return RawImage(rng.random((h, w)), pattern, **meta)


def distinct_raw(h, w, pattern=QUAD):
    return RawImage(np.arange(h * w, dtype=float).reshape(h, w) / (h * w), pattern)
