import numpy as np
import pytest

from hs2.state import FourierSeries, InitialData

TWO_PI = 2 * np.pi


def series(const=0.0, *modes):
    return FourierSeries(const, tuple(modes))


SIN_OVER_2PI = series(0.0, (1, 0.0, 1 / TWO_PI))


@pytest.fixture
def scenario_a():
    """k = 1, u0 = sin(2 pi x)/(2 pi), rho0 = 0 (a = -1/4)."""
    return InitialData(SIN_OVER_2PI, series(), 1)


@pytest.fixture
def scenario_b():
    """k = 1, u0 = sin(2 pi x)/(2 pi), rho0 = 1 (a = -3/4)."""
    return InitialData(SIN_OVER_2PI, series(1.0), 1)


@pytest.fixture
def scenario_c():
    """k = 1, u0 = 0, rho0 = sin(2 pi x) (a = -1/4)."""
    return InitialData(series(), series(0.0, (1, 0.0, 1.0)), 1)


@pytest.fixture
def scenario_e():
    """k = -1, u0 = sin(2 pi x)/(2 pi), rho0 = cos(2 pi x) (a = 0)."""
    return InitialData(SIN_OVER_2PI, series(0.0, (1, 1.0, 0.0)), -1)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
