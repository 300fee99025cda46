import mpmath
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def mp40():
    """Run a test at 40 significant digits, restoring the previous precision."""
    old = mpmath.mp.dps
    mpmath.mp.dps = 40
    yield
    mpmath.mp.dps = old


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
