import math

import numpy as np
import pytest

from chargeflow import Grid, PlaneWave
from chargeflow.gaussian import case, sample_position


@pytest.fixture(scope="session")
def grid():
    """Box of length 64 pi: p0 = 5 and p0 = 0.25 both sit on the momentum lattice."""
    length = 64 * math.pi
    return Grid.from_bounds(-length / 2, length, 2048)


@pytest.fixture(scope="session")
def case_a(grid):
    g = case("A")
    return g, PlaneWave(g.p_g), sample_position(g, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_RESULTS = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_RESULTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
