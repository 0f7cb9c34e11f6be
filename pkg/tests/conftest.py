import math
import os

import pytest
from hypothesis import HealthCheck, settings

from bpsosc.core import BpsStructure, SkewForm

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
RAY = -math.pi / 2


@pytest.fixture
def double_a1():
    """Rank 2, <gamma, gamma_vee> = -1, Omega(+-gamma) = 1, Z(gamma) = 1, Z(gamma_vee) = i."""
    return BpsStructure(SkewForm([[0, -1], [1, 0]]), (1.0, 1j), {(1, 0): 1, (-1, 0): 1})


@pytest.fixture
def fixture_path():
    def get(name):
        return os.path.join(FIXTURES, name)
    return get


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion and return the verdict."""
    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
