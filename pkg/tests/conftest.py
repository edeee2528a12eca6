import numpy as np
import pytest

from msf_shepwm import CircuitParams, TimingGrid, initial_schedule_from_objective, preset

INITIAL_ANGLES = (36, 49, 68, 77, 88, 111)
SETUP1_ANGLES = (39, 51, 70, 82, 90, 111)
SETUP2_ANGLES = (35, 48, 65, 74, 86, 111)
SELECTED = (1, 3, 7, 17)
THRESHOLDS = {5: 0.10, 9: 0.18, 11: 0.22, 13: 0.26, 15: 0.30}

_acceptance_lines: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid476():
    return TimingGrid(24e6, 476)


@pytest.fixture(scope="session")
def grid3888():
    return TimingGrid(6.25e6, 3888)


@pytest.fixture(scope="session")
def f2(grid476):
    return preset("f2", grid476.omega)


@pytest.fixture(scope="session")
def coil1():
    return CircuitParams(24.0, 1.4e-6)


@pytest.fixture(scope="session")
def template476(f2, grid476):
    return initial_schedule_from_objective(f2, grid476)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
