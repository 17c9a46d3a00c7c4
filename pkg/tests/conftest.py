import os
import zlib

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_criteria = {}


@pytest.fixture
def rng(request):
    # a fresh, test-specific generator so tests do not depend on each other
    return np.random.default_rng(zlib.crc32(request.node.nodeid.encode()))


def pytest_runtest_logreport(report):
    criterion = dict(report.user_properties).get("criterion")
    if criterion is None:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _criteria.get(criterion, "PASS")
        _criteria[criterion] = "PASS" if (prev == "PASS" and report.outcome == "passed") else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda c: int(c.split(":")[0])):
        terminalreporter.write_line(f"{_criteria[name]}  criterion {name}")
