import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# criterion lines from test_acceptance.py, repeated at the end of the run
ACCEPTANCE_LINES: list = []


@pytest.fixture
def verdict():
    def emit(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        if not ok:
            pytest.fail(line, pytrace=False)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
