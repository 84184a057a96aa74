import os

import pytest
from hypothesis import HealthCheck, settings

from karmafhn.model import FhnParams, KarmaParams

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def karma():
    return KarmaParams()


@pytest.fixture
def fhn():
    return FhnParams()


# -- acceptance bookkeeping ------------------------------------------------------------------

_verdicts = {}
_details = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def detail(request):
    """Attach a one-line measurement summary to the criterion's report line."""
    marker = request.node.get_closest_marker("criterion")

    def put(text):
        if marker is not None:
            _details.setdefault(marker.args[0], []).append(text)
    return put


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None and (rep.when == "call" or rep.failed or rep.skipped):
        n = marker.args[0]
        ok = rep.passed and not hasattr(rep, "wasxfail")
        prev = _verdicts.get(n, True)
        _verdicts[n] = prev and ok
    return rep


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_verdicts):
        line = f"criterion {n:2d}: {'PASS' if _verdicts[n] else 'FAIL'}"
        if n in _details:
            line += "  " + "; ".join(_details[n])
        tr.write_line(line)
