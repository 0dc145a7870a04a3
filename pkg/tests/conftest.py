import numpy as np
import pytest

from parawell import FieldState, Grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line8():
    return Grid.line(8)


@pytest.fixture
def square8():
    return Grid.square(8)


def random_state(grid, rng, batch=()):
    return FieldState(grid, rng.standard_normal((*batch, grid.n_dof)))


# pass/fail lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
