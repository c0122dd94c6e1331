import functools

import pytest
from hypothesis import HealthCheck, settings

from musym.problem import load

settings.register_profile(
    "seeded",
    max_examples=50,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("seeded")


@functools.lru_cache(maxsize=None)
def problem(name):
    return load(name)


@pytest.fixture
def pb():
    return problem


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
