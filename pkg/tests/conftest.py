import numpy as np
import pytest

from fastdiff.params import Params
from fastdiff.profile import integrate_profile

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def default_params():
    return Params(n=3, m=0.0, rho1=1.0, beta=1.0, lam=1.0, T=1.0)


@pytest.fixture(scope="session")
def default_profile(default_params):
    return integrate_profile(default_params, rho_max=12.0, tol=1e-12)


@pytest.fixture(scope="session")
def profile_m02():
    return integrate_profile(Params(n=3, m=0.2, rho1=1.0, beta=1.0, lam=1.0),
                             rho_max=25.0, tol=1e-12)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
