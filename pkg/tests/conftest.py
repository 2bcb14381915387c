import numpy as np
import pytest

from cylfi.model import BilinearForm, ModelSpace


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


@pytest.fixture
def standard_form():
    """``B = i I`` on R^2: the standard normal after projection."""
    return BilinearForm(ModelSpace(2), 1j * np.eye(2))


def scalar_form(b):
    return BilinearForm(ModelSpace(1), [[b]])


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
