import numpy as np
import pytest

from nnrank import DenseTensor

FOOLING_4X4 = [
    [1, 0, 1, 0],
    [0, 1, 0, 1],
    [1, 0, 0, 1],
    [0, 1, 1, 0],
]

_acceptance_lines: list[str] = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def fooling4x4():
    return DenseTensor.from_array(np.array(FOOLING_4X4, dtype=float))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
