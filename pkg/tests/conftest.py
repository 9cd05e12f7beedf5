import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mlalpha_cda.spectral_core import Grid

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def grid8():
    return Grid(N=8)


@pytest.fixture(scope="session")
def grid16():
    return Grid(N=16)


@pytest.fixture(scope="session")
def grid32():
    return Grid(N=32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        verdict, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d} {verdict}  {module.TITLES[number]}: {detail}")
