import numpy as np
import pytest

from vip_extragrad import _kernels, pnorm

#: PASS/FAIL lines collected by the acceptance module, echoed after the run
acceptance_report = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_report:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_report:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    # keep JIT compilation out of the timed acceptance tests
    _kernels.warmup()


def random_feasible(ball, rng):
    """Uniform-ish interior point of a p-norm ball (direction x radial)."""
    z = rng.standard_normal(ball.dim)
    r = rng.uniform(0.0, 1.0) ** (1.0 / ball.dim)
    return z / pnorm(z, ball.p) * r


def random_exterior(ball, rng, lo=1.01, hi=3.0):
    z = rng.standard_normal(ball.dim)
    return z / pnorm(z, ball.p) * rng.uniform(lo, hi)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
