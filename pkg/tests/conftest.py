import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vekua.group import GroupFactor, GroupModel
from vekua.modes import VekuaParams
from vekua.trigpoly import TrigPoly

settings.register_profile("vekua", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("vekua")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def product_model():
    return GroupModel((GroupFactor.circle(), GroupFactor.su2()), (0.0, 0.0), (0.3, 0.7))


@pytest.fixture
def case1_params(product_model):
    q = TrigPoly.from_coefficients(1.0, {1: 0.5}, {2: 0.3})
    return VekuaParams(product_model, 0.5, 2.0, TrigPoly.from_coefficients(0.05, {1: 0.2}), q)


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split()[0])):
            terminalreporter.write_line(line)
