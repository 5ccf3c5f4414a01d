import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ldg_phasefield import Grid2D, MaterialConstants, ModelParams

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SP = 0.64e4 / 0.35e4  # s_+ = B / C for MBBA at A = -B^2 / (3C)


@pytest.fixture
def mbba():
    return MaterialConstants.mbba()


@pytest.fixture
def defaults(mbba):
    """Reference parameters: eps_bar 0.005, V0 0.09, omega_p/L 3e7, omega_v/L 6e14, lambda 1 um."""
    return ModelParams.from_physical(mbba, 1e-6)


def random_interior(grid: Grid2D, rng, scale=1.0, uniform=False):
    n = grid.n
    v = rng.uniform(size=(n, n)) if uniform else scale * rng.standard_normal((n, n))
    return np.where(grid.interior_mask(), v, 0.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
