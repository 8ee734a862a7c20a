import numpy as np
import pytest

from scatterbayes.curve import PeriodicGrid


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def grid64():
    return PeriodicGrid(64)


@pytest.fixture
def grid128():
    return PeriodicGrid(128)


_CRITERIA: list[str] = []


@pytest.fixture
def record_criterion():
    """Log one PASS/FAIL line; the lines are repeated in the terminal summary."""

    def record(label: str, passed: bool, detail: str) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
