import numpy as np
import pytest

from qstab.presets import washington_like_model

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def washington():
    return washington_like_model()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
