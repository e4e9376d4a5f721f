import os

import pytest
from hypothesis import HealthCheck, settings

from peierls import make_fk, make_twist

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def fk4():
    return make_fk([1.0], [4.0])


@pytest.fixture(scope="session")
def fk0():
    return make_fk([1.0], [0.0])


@pytest.fixture(scope="session")
def twist2():
    return make_twist(2.0)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results, key=lambda k: (int(k[1:].split("[")[0]), k)):
        passed, detail = results[key]
        terminalreporter.write_line(f"{key:<18} {'PASS' if passed else 'FAIL'}  {detail}")
