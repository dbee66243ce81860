import numpy as np
import pytest

from dunkl_hardy.special import LambdaParam

LAMBDAS = (0.25, 0.5, 1.0, 2.0)


@pytest.fixture(params=LAMBDAS, ids=lambda v: f"lam={v:g}")
def lp(request):
    return LambdaParam(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.acceptance_lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
