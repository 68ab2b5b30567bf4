import numpy as np
import pytest

# worked 3x3 examples: non-reversible, negative eigenvalue, negative rate, embeddable
EXAMPLE_1 = np.array([[1 / 6, 1 / 3, 1 / 2], [1 / 2, 1 / 6, 1 / 3], [1 / 3, 1 / 2, 1 / 6]])
EXAMPLE_2 = np.array([[1 / 3, 1 / 2, 1 / 6], [1 / 2, 1 / 6, 1 / 3], [1 / 6, 1 / 3, 1 / 2]])
EXAMPLE_3 = np.array([[0.5, 0.4, 0.1], [0.4, 0.4, 0.2], [0.1, 0.2, 0.7]])
EXAMPLE_4 = np.array([[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.25, 0.25, 0.5]])

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
