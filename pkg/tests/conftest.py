from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from radonshear.phantoms import cone_noise
from radonshear.shearlet2d import make_mother

settings.register_profile(
    "default",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# lines appended by the acceptance module, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mother():
    return make_mother()


@pytest.fixture(scope="session")
def cone256():
    return cone_noise(seed=0)


@pytest.fixture(scope="session")
def cone128():
    return cone_noise(seed=0, n=128)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
